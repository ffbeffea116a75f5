//! Byte-pair-encoding training over pretokenized words.
//!
//! Pair counts are maintained incrementally; a lazy max-heap orders candidate
//! pairs by count, then by `(left, right)` string order for ties.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use super::merges::{MergeTable, Rule, Symbols};
use super::{pretokenize, Vocabulary};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

type Pair = (u32, u32);

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    count: u64,
    left: String,
    right: String,
    pair: Pair,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| Reverse((&self.left, &self.right)).cmp(&Reverse((&other.left, &other.right))))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Trains a BPE vocabulary and merge table.
///
/// The vocabulary holds the base alphabet (every character seen, sorted by
/// code point) followed by merged tokens in creation order. Training stops
/// at `vocab_size` tokens or when no adjacent pair remains.
pub fn train_bpe(corpus: &Corpus, vocab_size: usize) -> Result<(Vocabulary, MergeTable)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut word_counts: BTreeMap<String, u64> = BTreeMap::new();
    for doc in corpus.iter() {
        for w in pretokenize(doc) {
            *word_counts.entry(w).or_default() += 1;
        }
    }
    let alphabet: std::collections::BTreeSet<char> =
        word_counts.keys().flat_map(|w| w.chars()).collect();
    if alphabet.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if vocab_size < alphabet.len() {
        return Err(Error::VocabTooSmall {
            requested: vocab_size,
            base: alphabet.len(),
        });
    }

    let mut symbols = Symbols::default();
    let mut vocab: Vec<String> = Vec::with_capacity(vocab_size);
    for &c in &alphabet {
        let s = c.to_string();
        symbols.intern(&s);
        vocab.push(s);
    }

    let mut words: Vec<Vec<u32>> = Vec::with_capacity(word_counts.len());
    let mut freqs: Vec<u64> = Vec::with_capacity(word_counts.len());
    for (w, &n) in &word_counts {
        words.push(w.chars().map(|c| symbols.char_id(c).expect("interned")).collect());
        freqs.push(n);
    }

    let mut pair_counts: FxHashMap<Pair, u64> = FxHashMap::default();
    let mut where_: FxHashMap<Pair, FxHashSet<usize>> = FxHashMap::default();
    for (i, w) in words.iter().enumerate() {
        for p in w.windows(2) {
            let pair = (p[0], p[1]);
            *pair_counts.entry(pair).or_default() += freqs[i];
            where_.entry(pair).or_default().insert(i);
        }
    }

    let candidate = |symbols: &Symbols, pair: Pair, count: u64| Candidate {
        count,
        left: symbols.string(pair.0).to_string(),
        right: symbols.string(pair.1).to_string(),
        pair,
    };
    let mut heap: BinaryHeap<Candidate> = pair_counts
        .iter()
        .map(|(&p, &c)| candidate(&symbols, p, c))
        .collect();

    let mut rules: Vec<Rule> = Vec::new();
    while vocab.len() < vocab_size {
        let Some(top) = heap.pop() else { break };
        let current = pair_counts.get(&top.pair).copied().unwrap_or(0);
        if current == 0 || current != top.count {
            continue;
        }
        let (a, b) = top.pair;
        let merged_str = format!("{}{}", top.left, top.right);
        let is_new = symbols.get(&merged_str).is_none();
        let merged = symbols.intern(&merged_str);
        if is_new {
            vocab.push(merged_str);
        }
        rules.push(Rule {
            left: a,
            right: b,
            merged,
            stage: None,
        });

        let mut affected: Vec<usize> = where_
            .remove(&top.pair)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        affected.sort_unstable();
        let mut touched: FxHashSet<Pair> = FxHashSet::default();
        for wi in affected {
            let freq = freqs[wi];
            let old = &words[wi];
            if !old.windows(2).any(|p| p[0] == a && p[1] == b) {
                continue;
            }
            for p in old.windows(2) {
                let pair = (p[0], p[1]);
                let c = pair_counts.get_mut(&pair).expect("counted pair");
                *c -= freq;
                touched.insert(pair);
            }
            let mut new = Vec::with_capacity(old.len());
            let mut i = 0;
            while i < old.len() {
                if i + 1 < old.len() && old[i] == a && old[i + 1] == b {
                    new.push(merged);
                    i += 2;
                } else {
                    new.push(old[i]);
                    i += 1;
                }
            }
            for p in new.windows(2) {
                let pair = (p[0], p[1]);
                *pair_counts.entry(pair).or_default() += freq;
                where_.entry(pair).or_default().insert(wi);
                touched.insert(pair);
            }
            words[wi] = new;
        }
        pair_counts.retain(|_, c| *c > 0);
        let mut touched: Vec<Pair> = touched.into_iter().collect();
        touched.sort_unstable();
        for p in touched {
            if let Some(&c) = pair_counts.get(&p) {
                heap.push(candidate(&symbols, p, c));
            }
        }
    }

    let table = MergeTable::from_parts(Arc::new(symbols), rules, None)?.with_alphabet(alphabet);
    Ok((Vocabulary::new(vocab)?, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn corpus(docs: &[&str]) -> Corpus {
        Corpus::new(docs.iter().map(|s| s.to_string()).collect())
    }

    /// Brute-force first-merge oracle: count every adjacent symbol pair over
    /// the pretokenized words and pick the most frequent, ties by (left, right).
    fn first_merge_oracle(c: &Corpus) -> (String, String) {
        let mut counts: HashMap<(String, String), u64> = HashMap::new();
        for doc in c.iter() {
            for w in pretokenize(doc) {
                let chars: Vec<String> = w.chars().map(|c| c.to_string()).collect();
                for p in chars.windows(2) {
                    *counts.entry((p[0].clone(), p[1].clone())).or_default() += 1;
                }
            }
        }
        let mut all: Vec<_> = counts.into_iter().collect();
        all.sort_by(|(pa, ca), (pb, cb)| cb.cmp(ca).then(pa.cmp(pb)));
        all[0].0.clone()
    }

    #[test]
    fn repeated_pair_merges_first() {
        let c = corpus(&["aa aa aa"]);
        let (vocab, table) = train_bpe(&c, 3).unwrap();
        // base alphabet {a, Ġ}
        assert_eq!(vocab.len(), 3);
        let first = table.rule(0).unwrap();
        assert_eq!((first.left.as_str(), first.right.as_str()), ("a", "a"));
        assert_eq!(first_merge_oracle(&c), ("a".into(), "a".into()));
    }

    #[test]
    fn first_merge_matches_pair_counting_oracle() {
        // "ab ab ac" pretokenizes to [ab, Ġab, Ġac]: (a,b) and (Ġ,a) both
        // occur twice and the (left, right) tie-break picks (a,b).
        let c = corpus(&["ab ab ac"]);
        let (_, table) = train_bpe(&c, 6).unwrap();
        let (l, r) = first_merge_oracle(&c);
        let first = table.rule(0).unwrap();
        assert_eq!((first.left.clone(), first.right.clone()), (l, r));
        assert_eq!((first.left.as_str(), first.right.as_str()), ("a", "b"));
        // then (Ġ,ab), (Ġ,a) and (a,c) tie at one and "a" sorts before "Ġ"
        let second = table.rule(1).unwrap();
        assert_eq!((second.left.as_str(), second.right.as_str()), ("a", "c"));
    }

    #[test]
    fn marker_pair_wins_when_every_word_is_marked() {
        // Three marked words: (Ġ,a) occurs three times.
        let c = corpus(&[" ab ab ac"]);
        let (_, table) = train_bpe(&c, 6).unwrap();
        let first = table.rule(0).unwrap();
        assert_eq!((first.left.as_str(), first.right.as_str()), ("Ġ", "a"));
        assert_eq!(first_merge_oracle(&c), ("Ġ".into(), "a".into()));
    }

    #[test]
    fn vocab_smaller_than_alphabet_is_an_error() {
        let c = corpus(&["abc def"]);
        assert!(matches!(train_bpe(&c, 3), Err(Error::VocabTooSmall { base: 7, .. })));
        assert!(matches!(train_bpe(&Corpus::default(), 10), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn training_is_deterministic() {
        let c = corpus(&["the cat sat on the mat", "the dog sat on the log", "a cat and a dog"]);
        let (v1, t1) = train_bpe(&c, 30).unwrap();
        let (v2, t2) = train_bpe(&c, 30).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(
            super::super::merges::merges_to_string(&t1),
            super::super::merges::merges_to_string(&t2)
        );
        assert_eq!(v1.len(), 30);
    }

    #[test]
    fn stops_when_no_pairs_remain() {
        let c = corpus(&["ab"]);
        let (v, t) = train_bpe(&c, 100).unwrap();
        assert_eq!(v.tokens(), &["a", "b", "ab"]);
        assert_eq!(t.len(), 1);
    }
}
