//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every exported function takes plain strings and numbers and returns a
//! JSON string; errors come back as `{"error": "..."}`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use charprobe::analysis::{check_condition, Bindings, ConditionCase, Pattern};
use charprobe::corpus::{normalize_letters, SeedSpec};
use charprobe::tokenizers::{build_controlled_tokenizer, pretokenize, tokenize_tcs, MergeTable};
use charprobe::transforms::{
    build_wordsub_map, charpert, collect_word_types, lemmatize, map_words, porter_stem, wordsub_apply, LemmaMap,
};

#[derive(Debug, Serialize)]
pub struct TraceStep {
    /// `None` for the initial character split.
    pub rule: Option<String>,
    pub rank: Option<u32>,
    pub tokens: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct WordSegmentation {
    pub word: String,
    pub controlled: Vec<String>,
    pub tcs: Vec<String>,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Serialize)]
pub struct ConditionView {
    pub word: String,
    pub target: Vec<String>,
    pub segmentation: Vec<String>,
    pub target_occurs: bool,
    pub condition_holds: bool,
    pub implication_ok: bool,
}

#[derive(Debug, Serialize)]
pub struct TransformView {
    pub kind: String,
    pub input: String,
    pub output: String,
}

fn controlled_table(seed: u64) -> charprobe::Result<MergeTable> {
    build_controlled_tokenizer(&SeedSpec::new(seed, "controlled")).map(|(_, table)| table)
}

/// Controlled and TCS segmentations of every word in `text`, with the
/// controlled merge trace. The text is lowercased and reduced to letters.
pub fn segment_words(text: &str, seed: u64) -> charprobe::Result<Vec<WordSegmentation>> {
    let table = controlled_table(seed)?;
    let mut out = Vec::new();
    for word in pretokenize(&normalize_letters(text)) {
        let trace = table
            .apply_traced(&word)?
            .into_iter()
            .map(|(rule, tokens)| TraceStep {
                rule: rule.as_ref().map(|r| format!("{} + {}", r.left, r.right)),
                rank: rule.map(|r| r.rank),
                tokens,
            })
            .collect::<Vec<_>>();
        let controlled = trace.last().map(|s| s.tokens.clone()).unwrap_or_default();
        out.push(WordSegmentation {
            tcs: tokenize_tcs(&word),
            word,
            controlled,
            trace,
        });
    }
    Ok(out)
}

/// Checks one pattern instance. `letters` holds the five slot letters in
/// word order.
pub fn condition_view(pattern: &str, letters: &str, seed: u64) -> charprobe::Result<ConditionView> {
    let pattern: Pattern = pattern.parse()?;
    let chars: Vec<char> = letters.chars().filter(|c| !c.is_whitespace()).collect();
    let letters: [char; 5] = chars.try_into().map_err(|c: Vec<char>| {
        charprobe::Error::InvalidArgument(format!("expected 5 letters, got {}", c.len()))
    })?;
    if let Some(c) = letters.iter().find(|c| !c.is_ascii_lowercase()) {
        return Err(charprobe::Error::InvalidArgument(format!("{c:?} is not a letter a..z")));
    }
    let case = ConditionCase {
        pattern,
        bindings: Bindings::for_pattern(pattern, letters),
    };
    let outcome = check_condition(&case, &controlled_table(seed)?)?;
    Ok(ConditionView {
        word: case.word()?,
        target: case.target()?,
        segmentation: outcome.segmentation,
        target_occurs: outcome.target_occurs,
        condition_holds: outcome.condition_holds,
        implication_ok: outcome.implication_ok,
    })
}

/// Applies one text transformation to `text`. WordSub draws its mapping
/// from the word types of `text` alone.
pub fn transform_view(kind: &str, text: &str, seed: u64) -> charprobe::Result<TransformView> {
    let seed_spec = SeedSpec::new(seed, format!("transform/{kind}"));
    let output = match kind {
        "charpert" => charpert(text, &mut seed_spec.stream(0)),
        "wordsub" => {
            let corpus = charprobe::corpus::Corpus::new(vec![text.to_string()]);
            let map = build_wordsub_map(collect_word_types(&corpus), &seed_spec)?;
            wordsub_apply(text, &map)?
        }
        "stem" => map_words(text, porter_stem),
        "lemma" => {
            let map = LemmaMap::builtin();
            map_words(text, |w| lemmatize(w, &map).to_string())
        }
        other => return Err(charprobe::Error::InvalidArgument(format!("unknown transform {other:?}"))),
    };
    Ok(TransformView {
        kind: kind.to_string(),
        input: text.to_string(),
        output,
    })
}

fn to_json<T: Serialize>(result: charprobe::Result<T>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).expect("view serializes"),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[wasm_bindgen]
pub fn segment(text: &str, seed: u32) -> String {
    to_json(segment_words(text, u64::from(seed)))
}

#[wasm_bindgen]
pub fn condition(pattern: &str, letters: &str, seed: u32) -> String {
    to_json(condition_view(pattern, letters, u64::from(seed)))
}

#[wasm_bindgen]
pub fn transform(kind: &str, text: &str, seed: u32) -> String {
    to_json(transform_view(kind, text, u64::from(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_ends_at_the_segmentation() {
        let words = segment_words("She enterprise", 1).unwrap();
        assert_eq!(words.len(), 2);
        assert_eq!(words[0].word, "she");
        assert_eq!(words[1].tcs, ["Ġent", "erp", "ris", "e"]);
        for w in &words {
            assert_eq!(w.trace.first().unwrap().rule, None);
            assert_eq!(w.controlled.concat(), w.word);
            assert!(w.controlled.iter().all(|t| t.trim_start_matches('Ġ').chars().count() <= 3));
        }
    }

    #[test]
    fn condition_views_satisfy_the_implication() {
        for pattern in Pattern::ALL {
            for letters in ["abcde", "zzzzz", "qwert"] {
                let v = condition_view(pattern.name(), letters, 7).unwrap();
                assert!(v.implication_ok, "{pattern} {letters}");
            }
        }
    }

    #[test]
    fn bad_inputs_become_json_errors() {
        assert!(condition("G2_3", "abc", 1).contains("\"error\""));
        assert!(condition("nope", "abcde", 1).contains("\"error\""));
        assert!(transform("shout", "x", 1).contains("\"error\""));
    }

    #[test]
    fn transforms_are_seeded() {
        let text = "The cats were running quickly";
        for kind in ["charpert", "wordsub", "stem", "lemma"] {
            let a = transform_view(kind, text, 3).unwrap();
            assert_eq!(a.output, transform_view(kind, text, 3).unwrap().output);
        }
        assert_eq!(transform_view("stem", text, 0).unwrap().output, "the cat were run quickli");
    }
}
