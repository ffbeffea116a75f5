//! Three-character segmentation: fixed-width chunking independent of any
//! merge table.

use super::{pretokenize, split_marker, TokenSeq, WHITESPACE_MARKER};

/// Chunks a word into 3-character units from the left; a 1–2 character
/// remainder is the final unit. Words of at most two characters stay whole.
/// A leading marker is not counted and stays attached to the first chunk.
pub fn tokenize_tcs(word: &str) -> TokenSeq {
    let (marked, body) = split_marker(word);
    let chars: Vec<char> = body.chars().collect();
    if chars.len() <= 2 {
        return if word.is_empty() { Vec::new() } else { vec![word.to_string()] };
    }
    let mut out: TokenSeq = chars.chunks(3).map(|c| c.iter().collect()).collect();
    if marked {
        out[0].insert(0, WHITESPACE_MARKER);
    }
    out
}

/// Pretokenizes a document and chunks every word.
pub fn tokenize_tcs_doc(doc: &str) -> TokenSeq {
    pretokenize(doc).iter().flat_map(|w| tokenize_tcs(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizers::detokenize;

    #[test]
    fn enterprise_chunks() {
        assert_eq!(tokenize_tcs("Ġenterprise"), vec!["Ġent", "erp", "ris", "e"]);
    }

    #[test]
    fn short_words_stay_whole() {
        assert_eq!(tokenize_tcs("Ġto"), vec!["Ġto"]);
        assert_eq!(tokenize_tcs("a"), vec!["a"]);
        assert_eq!(tokenize_tcs("Ġ"), vec!["Ġ"]);
        assert_eq!(tokenize_tcs(""), Vec::<String>::new());
    }

    #[test]
    fn remainder_becomes_last_token() {
        assert_eq!(tokenize_tcs("abcd"), vec!["abc", "d"]);
        assert_eq!(tokenize_tcs("abcde"), vec!["abc", "de"]);
        assert_eq!(tokenize_tcs("Ġabcdef"), vec!["Ġabc", "def"]);
    }

    #[test]
    fn document_round_trip() {
        let doc = "the enterprise was in orbit";
        let toks = tokenize_tcs_doc(doc);
        assert_eq!(toks[..5], ["the", "Ġent", "erp", "ris", "e"]);
        assert_eq!(detokenize(&toks), doc);
    }
}
