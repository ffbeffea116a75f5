//! The controlled tokenizer: every 1–3 letter string, with and without the
//! leading marker, and a merge table built by construction.
//!
//! Odd-length strings take the longer prefix (`abc` from `(ab, c)`), even
//! lengths split evenly (`Ġdef` from `(Ġd, ef)`). Rule order is shuffled
//! within each stage and stages are ranked G1 < C2 < G2 < C3 < G3.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::merges::{MergeTable, Rule, Stage, Symbols};
use super::{Vocabulary, WHITESPACE_MARKER};
use crate::corpus::SeedSpec;
use crate::error::Result;

/// 2 × (26 + 26² + 26³).
pub const CONTROLLED_VOCAB_SIZE: usize = 36_556;

/// The stage-structured rule set for an alphabet, before shuffling.
///
/// Building a layout interns every token once; [`ControlledLayout::table`]
/// then only permutes ranks, which keeps repeated table sampling cheap.
#[derive(Debug, Clone)]
pub struct ControlledLayout {
    letters: Vec<char>,
    symbols: Arc<Symbols>,
    stages: [Vec<Rule>; 5],
}

impl ControlledLayout {
    pub fn new(letters: &[char]) -> Self {
        let mut symbols = Symbols::default();
        let m = WHITESPACE_MARKER;
        let mut stages: [Vec<Rule>; 5] = Default::default();
        let mut rule = |symbols: &mut Symbols, l: String, r: String, stage: Stage| {
            let left = symbols.intern(&l);
            let right = symbols.intern(&r);
            let merged = symbols.intern(&format!("{l}{r}"));
            stages[stage as usize].push(Rule {
                left,
                right,
                merged,
                stage: Some(stage),
            });
        };
        symbols.intern(&m.to_string());
        for &x in letters {
            symbols.intern(&x.to_string());
        }
        for &x in letters {
            rule(&mut symbols, m.to_string(), x.to_string(), Stage::G1);
        }
        for &x in letters {
            for &y in letters {
                rule(&mut symbols, x.to_string(), y.to_string(), Stage::C2);
                rule(&mut symbols, format!("{m}{x}"), y.to_string(), Stage::G2);
            }
        }
        for &x in letters {
            for &y in letters {
                for &z in letters {
                    rule(&mut symbols, format!("{x}{y}"), z.to_string(), Stage::C3);
                    rule(&mut symbols, format!("{m}{x}"), format!("{y}{z}"), Stage::G3);
                }
            }
        }
        ControlledLayout {
            letters: letters.to_vec(),
            symbols: Arc::new(symbols),
            stages,
        }
    }

    /// The full lowercase a–z layout.
    pub fn english() -> Self {
        let letters: Vec<char> = ('a'..='z').collect();
        Self::new(&letters)
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn rule_count(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }

    /// A table with each stage's rules shuffled by `rng`, stage-major ranks.
    pub fn table<R: Rng + ?Sized>(&self, rng: &mut R) -> MergeTable {
        let mut rules = Vec::with_capacity(self.rule_count());
        for stage in &self.stages {
            let start = rules.len();
            rules.extend_from_slice(stage);
            rules[start..].shuffle(rng);
        }
        let mut alphabet = self.letters.clone();
        alphabet.push(WHITESPACE_MARKER);
        MergeTable::from_parts(Arc::clone(&self.symbols), rules, Some(alphabet.into_iter().collect()))
            .expect("controlled rules are unique")
    }

    /// Every 1–3 letter token without marker (by length, then lexicographic),
    /// followed by the same list with the marker.
    pub fn vocabulary(&self) -> Vocabulary {
        let mut plain = Vec::new();
        for &x in &self.letters {
            plain.push(x.to_string());
        }
        for &x in &self.letters {
            for &y in &self.letters {
                plain.push(format!("{x}{y}"));
            }
        }
        for &x in &self.letters {
            for &y in &self.letters {
                for &z in &self.letters {
                    plain.push(format!("{x}{y}{z}"));
                }
            }
        }
        let marked: Vec<String> = plain.iter().map(|t| format!("{WHITESPACE_MARKER}{t}")).collect();
        plain.extend(marked);
        Vocabulary::new(plain).expect("controlled tokens are unique")
    }
}

/// Vocabulary of the a–z controlled tokenizer; independent of the seed.
pub fn controlled_vocabulary() -> Vocabulary {
    ControlledLayout::english().vocabulary()
}

/// Builds the a–z controlled vocabulary and a seeded merge table.
pub fn build_controlled_tokenizer(seed: &SeedSpec) -> Result<(Vocabulary, MergeTable)> {
    let layout = ControlledLayout::english();
    let mut rng = seed.stream(0);
    let table = layout.table(&mut rng);
    Ok((layout.vocabulary(), table))
}
