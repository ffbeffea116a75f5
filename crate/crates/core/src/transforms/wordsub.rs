//! Type-level word substitution.
//!
//! Words are maximal runs of ASCII letters; everything between them passes
//! through. Each word type gets one random replacement of the same length
//! with the original position-wise case pattern, and distinct types never
//! share a replacement, so the map is invertible.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::Rng;

use crate::corpus::{Corpus, SeedSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSubMap {
    mapping: HashMap<String, String>,
    pub seed: Option<SeedSpec>,
}

/// Splits text into alternating non-word / word pieces; `true` marks words.
pub fn word_runs(text: &str) -> impl Iterator<Item = (bool, &str)> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    std::iter::from_fn(move || {
        if pos >= bytes.len() {
            return None;
        }
        let start = pos;
        let is_word = bytes[pos].is_ascii_alphabetic();
        while pos < bytes.len() && bytes[pos].is_ascii_alphabetic() == is_word {
            pos += 1;
        }
        // non-ASCII bytes are never alphabetic here, so runs end on char boundaries
        Some((is_word, &text[start..pos]))
    })
}

/// Every distinct word type in a corpus, sorted.
pub fn collect_word_types(corpus: &Corpus) -> BTreeSet<String> {
    let mut types = BTreeSet::new();
    for doc in corpus.iter() {
        for (is_word, w) in word_runs(doc) {
            if is_word && !types.contains(w) {
                types.insert(w.to_string());
            }
        }
    }
    types
}

fn apply_case(lower: &[u8], pattern: &str) -> String {
    lower
        .iter()
        .zip(pattern.bytes())
        .map(|(&c, p)| if p.is_ascii_uppercase() { c.to_ascii_uppercase() as char } else { c as char })
        .collect()
}

/// Draws a replacement for every word type. Types are processed in sorted
/// order from one stream; a draw that collides with an earlier replacement
/// is redrawn.
pub fn build_wordsub_map<I, S>(types: I, seed: &SeedSpec) -> Result<WordSubMap>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let types: BTreeSet<String> = types.into_iter().map(|s| s.as_ref().to_string()).collect();
    for t in &types {
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_alphabetic()) {
            return Err(Error::InvalidArgument(format!("word type {t:?} is not a run of ASCII letters")));
        }
    }
    // Uniqueness is on the lowercase draw, so types of one length compete
    // for 26^len strings whatever their case.
    let mut by_len: BTreeMap<usize, Vec<&String>> = BTreeMap::new();
    for t in &types {
        by_len.entry(t.len()).or_default().push(t);
    }
    let mut unplaceable = Vec::new();
    for (&len, ts) in &by_len {
        let capacity = 26f64.powi(len as i32);
        if ts.len() as f64 > capacity {
            unplaceable.extend(ts[capacity as usize..].iter().map(|s| s.to_string()));
        }
    }
    if !unplaceable.is_empty() {
        return Err(Error::CollisionExhaustion { types: unplaceable });
    }

    let mut rng = seed.stream(0);
    let mut used: HashSet<Vec<u8>> = HashSet::with_capacity(types.len());
    let mut mapping = HashMap::with_capacity(types.len());
    for t in &types {
        let draw = loop {
            let candidate: Vec<u8> = (0..t.len()).map(|_| b'a' + rng.gen_range(0..26u8)).collect();
            if !used.contains(&candidate) {
                break candidate;
            }
        };
        mapping.insert(t.clone(), apply_case(&draw, t));
        used.insert(draw);
    }
    Ok(WordSubMap {
        mapping,
        seed: Some(seed.clone()),
    })
}

impl WordSubMap {
    /// A map from explicit pairs; fails if two types share a replacement or a
    /// replacement changes length.
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut mapping = HashMap::new();
        let mut seen = HashSet::new();
        for (a, b) in pairs {
            let (a, b) = (a.into(), b.into());
            if a.len() != b.len() {
                return Err(Error::InvalidArgument(format!("{a:?} -> {b:?} changes length")));
            }
            if !seen.insert(b.to_ascii_lowercase()) {
                return Err(Error::InvalidArgument(format!("replacement {b:?} is not unique")));
            }
            mapping.insert(a, b);
        }
        Ok(WordSubMap { mapping, seed: None })
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.mapping.get(word).map(String::as_str)
    }

    pub fn inverse(&self) -> WordSubMap {
        WordSubMap {
            mapping: self.mapping.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
            seed: None,
        }
    }

    /// Sorted `(type, replacement)` pairs.
    pub fn pairs(&self) -> Vec<(&str, &str)> {
        let mut v: Vec<_> = self.mapping.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        v.sort_unstable();
        v
    }
}

/// Substitutes every word of `document`; punctuation and whitespace stay.
pub fn wordsub_apply(document: &str, map: &WordSubMap) -> Result<String> {
    let mut out = String::with_capacity(document.len());
    for (is_word, piece) in word_runs(document) {
        if is_word {
            out.push_str(map.get(piece).ok_or_else(|| Error::UnmappedWord(piece.to_string()))?);
        } else {
            out.push_str(piece);
        }
    }
    Ok(out)
}

pub fn wordsub_corpus(corpus: &Corpus, map: &WordSubMap) -> Result<Corpus> {
    corpus.iter().map(|d| wordsub_apply(d, map)).collect::<Result<Vec<_>>>().map(Corpus::new)
}
