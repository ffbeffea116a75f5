//! The four tokenization regimes: trained BPE, the controlled fixed-merge
//! tokenizer, three-character segmentation, and whitespace words.
//!
//! Text is pretokenized by splitting on U+0020. Every word after the first in
//! a document is prefixed with the marker `Ġ` (U+0120), so concatenating the
//! tokens and mapping `Ġ` back to a space reproduces the document exactly.

mod bpe;
mod controlled;
mod corpus;
mod merges;
mod tcs;
mod vocab;
mod word;

pub use bpe::train_bpe;
pub use controlled::{
    build_controlled_tokenizer, controlled_vocabulary, ControlledLayout, CONTROLLED_VOCAB_SIZE,
};
pub use corpus::{MergeTokenizer, TokenizedCorpus, Tokenizer};
pub use merges::{
    merge_strength, read_merges, write_merges, MergeRule, MergeTable, Stage, Strength,
    STAGE_MAJOR_HEADER,
};
pub use tcs::{tokenize_tcs, tokenize_tcs_doc};
pub use vocab::Vocabulary;
pub use word::{tokenize_word, WordVocabConfig};

/// Marks that a token begins a new space-separated word.
pub const WHITESPACE_MARKER: char = '\u{120}';

/// An ordered sequence of token strings.
pub type TokenSeq = Vec<String>;

/// Splits a document into words on single spaces, prefixing every word but
/// the first with the marker. A leading empty word (document starting with a
/// space) is dropped; interior and trailing empty words become a bare marker
/// so that no space is lost.
pub fn pretokenize(doc: &str) -> Vec<String> {
    let mut words = Vec::new();
    for (i, part) in doc.split(' ').enumerate() {
        if i == 0 {
            if !part.is_empty() {
                words.push(part.to_string());
            }
        } else {
            let mut w = String::with_capacity(part.len() + 2);
            w.push(WHITESPACE_MARKER);
            w.push_str(part);
            words.push(w);
        }
    }
    words
}

/// Concatenates tokens, mapping the marker back to a space.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for t in tokens {
        for ch in t.as_ref().chars() {
            out.push(if ch == WHITESPACE_MARKER { ' ' } else { ch });
        }
    }
    out
}

/// Splits a token into (has leading marker, body).
pub fn split_marker(token: &str) -> (bool, &str) {
    match token.strip_prefix(WHITESPACE_MARKER) {
        Some(rest) => (true, rest),
        None => (false, token),
    }
}

/// Number of characters after the optional leading marker.
pub fn body_len(token: &str) -> usize {
    split_marker(token).1.chars().count()
}
