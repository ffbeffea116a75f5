use std::collections::HashMap;

use rand::Rng;

use crate::tokenizers::{split_marker, TokenizedCorpus, Vocabulary};

/// Token ids grouped by (leading marker, body length in chars).
#[derive(Debug, Clone)]
pub struct TokenClasses {
    class_of: Vec<usize>,
    members: Vec<Vec<u32>>,
}

pub fn token_class(token: &str) -> (bool, usize) {
    let (marked, body) = split_marker(token);
    (marked, body.chars().count())
}

impl TokenClasses {
    pub fn new(vocab: &Vocabulary) -> Self {
        let mut index: HashMap<(bool, usize), usize> = HashMap::new();
        let mut members: Vec<Vec<u32>> = Vec::new();
        let mut class_of = Vec::with_capacity(vocab.len());
        for (id, tok) in vocab.iter() {
            let next = members.len();
            let c = *index.entry(token_class(tok)).or_insert(next);
            if c == members.len() {
                members.push(Vec::new());
            }
            members[c].push(id);
            class_of.push(c);
        }
        TokenClasses { class_of, members }
    }

    pub fn members_of(&self, id: u32) -> &[u32] {
        &self.members[self.class_of[id as usize]]
    }

    pub fn draw<R: Rng + ?Sized>(&self, id: u32, rng: &mut R) -> u32 {
        let m = self.members_of(id);
        m[rng.gen_range(0..m.len())]
    }
}

/// Replaces every token occurrence with a uniform draw from its
/// (marker, length) class. Occurrences are drawn independently, so one token
/// type maps to many replacements.
pub fn token_substitute<R: Rng + ?Sized>(corpus: &TokenizedCorpus, rng: &mut R) -> TokenizedCorpus {
    let classes = TokenClasses::new(&corpus.vocab);
    let docs = corpus
        .docs
        .iter()
        .map(|doc| doc.iter().map(|&id| classes.draw(id, rng)).collect())
        .collect();
    TokenizedCorpus {
        vocab: corpus.vocab.clone(),
        docs,
    }
}
