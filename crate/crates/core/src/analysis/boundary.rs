//! Character pairs across subword boundaries and their merge strength.

use std::collections::BTreeMap;

use rand::Rng;

use super::stats::{spearman, spearman_permutation_p};
use crate::error::{Error, Result};
use crate::tokenizers::{split_marker, MergeTable, TokenizedCorpus};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundaryPairTable {
    /// (last letter of a token, first letter of the next token) → count.
    pub counts: BTreeMap<(char, char), u64>,
    pub include_cross_word: bool,
}

impl BoundaryPairTable {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Counts adjacent token pairs. Only within-word boundaries (successor
/// without marker) count unless `include_cross_word` is set; tokens with no
/// letters after the marker never contribute.
pub fn boundary_pair_stats(corpus: &TokenizedCorpus, include_cross_word: bool) -> BoundaryPairTable {
    let edges: Vec<Option<(char, char, bool)>> = corpus
        .vocab
        .iter()
        .map(|(_, t)| {
            let (marked, body) = split_marker(t);
            Some((body.chars().next()?, body.chars().next_back()?, marked))
        })
        .collect();
    let mut counts = BTreeMap::new();
    for doc in &corpus.docs {
        for w in doc.windows(2) {
            let (Some((_, last, _)), Some((first, _, marked))) = (edges[w[0] as usize], edges[w[1] as usize]) else {
                continue;
            };
            if marked && !include_cross_word {
                continue;
            }
            *counts.entry((last, first)).or_default() += 1;
        }
    }
    BoundaryPairTable {
        counts,
        include_cross_word,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrengthCorrelation {
    /// Spearman ρ between merge rank (larger = weaker) and boundary
    /// frequency; 0 when degenerate.
    pub rho: f64,
    pub p_value: Option<f64>,
    pub pairs: usize,
    /// Set when either axis is constant and ρ is undefined.
    pub degenerate: bool,
}

/// One row per counted pair: `(left, right, merge rank, frequency)`. A pair
/// without a rule gets rank `merges.len()`, weaker than every rule.
pub fn strength_rows(table: &BoundaryPairTable, merges: &MergeTable) -> Vec<(char, char, u32, u64)> {
    let no_rule = merges.len() as u32;
    table
        .counts
        .iter()
        .map(|(&(l, r), &n)| {
            let rank = merges.rank(&l.to_string(), &r.to_string()).unwrap_or(no_rule);
            (l, r, rank, n)
        })
        .collect()
}

pub fn correlate_strength_frequency<R: Rng + ?Sized>(
    table: &BoundaryPairTable,
    merges: &MergeTable,
    permutations: usize,
    rng: &mut R,
) -> Result<StrengthCorrelation> {
    let rows = strength_rows(table, merges);
    if rows.len() < 3 {
        return Err(Error::TooFewPairs(rows.len()));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.2 as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.3 as f64).collect();
    Ok(match spearman(&x, &y) {
        Some(rho) => StrengthCorrelation {
            rho,
            p_value: (permutations > 0).then(|| spearman_permutation_p(&x, &y, permutations, rng)).flatten(),
            pairs: rows.len(),
            degenerate: false,
        },
        None => StrengthCorrelation {
            rho: 0.0,
            p_value: None,
            pairs: rows.len(),
            degenerate: true,
        },
    })
}

pub fn boundary_csv(table: &BoundaryPairTable, merges: &MergeTable) -> String {
    let mut out = String::from("left_char,right_char,merge_rank,frequency\n");
    for (l, r, rank, n) in strength_rows(table, merges) {
        out.push_str(&format!("{l},{r},{rank},{n}\n"));
    }
    out
}
