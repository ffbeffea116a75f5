//! Corpus manipulations: CharPert, WordSub, token substitution, stemming and
//! lemmatization.

mod charpert;
mod lemma;
mod porter;
mod toksub;
mod wordsub;

pub use charpert::{charpert, charpert_corpus};
pub use lemma::{lemmatize, LemmaMap};
pub use porter::porter_stem;
pub use toksub::{token_class, token_substitute, TokenClasses};
pub use wordsub::{
    build_wordsub_map, collect_word_types, word_runs, wordsub_apply, wordsub_corpus, WordSubMap,
};

use crate::corpus::Corpus;

/// Rewrites every ASCII-letter run of `document` with `f` applied to its
/// lowercase form; other characters are kept.
pub fn map_words(document: &str, mut f: impl FnMut(&str) -> String) -> String {
    let mut out = String::with_capacity(document.len());
    for (is_word, piece) in word_runs(document) {
        if is_word {
            out.push_str(&f(&piece.to_ascii_lowercase()));
        } else {
            out.push_str(piece);
        }
    }
    out
}

pub fn stem_corpus(corpus: &Corpus) -> Corpus {
    crate::par_map_indexed(&corpus.documents, |_, d| map_words(d, porter_stem)).into()
}

pub fn lemmatize_corpus(corpus: &Corpus, map: &LemmaMap) -> Corpus {
    crate::par_map_indexed(&corpus.documents, |_, d| map_words(d, |w| lemmatize(w, map).to_string())).into()
}
