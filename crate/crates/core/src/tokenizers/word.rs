//! Whitespace word tokens, with no subword segmentation.

use super::{TokenSeq, WHITESPACE_MARKER};

/// Splits on whitespace runs; every word after the first carries the marker.
///
/// Runs of whitespace collapse to one space, so detokenizing multi-space
/// input yields the single-spaced text.
pub fn tokenize_word(text: &str) -> TokenSeq {
    text.split_whitespace()
        .enumerate()
        .map(|(i, w)| if i == 0 { w.to_string() } else { format!("{WHITESPACE_MARKER}{w}") })
        .collect()
}

/// How a word-level vocabulary is built from observed word types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WordVocabConfig {
    /// Keep only the most frequent types (ties broken lexicographically);
    /// the rest map to `<unk>`. `None` keeps every type.
    pub max_size: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizers::detokenize;

    #[test]
    fn marks_non_initial_words() {
        assert_eq!(tokenize_word("she is"), vec!["she", "Ġis"]);
        assert_eq!(tokenize_word(""), Vec::<String>::new());
    }

    #[test]
    fn whitespace_runs_collapse() {
        let toks = tokenize_word("a  b");
        assert_eq!(toks, vec!["a", "Ġb"]);
        assert_eq!(detokenize(&toks), "a b");
        assert_eq!(detokenize(&tokenize_word("she dreams.")), "she dreams.");
    }
}
