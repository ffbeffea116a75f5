//! Ordered merge tables and greedy priority-ordered merge application.
//!
//! A table assigns each rule a unique rank (0 = highest priority). Applying a
//! table to a word starts from single characters and repeatedly fires the
//! applicable rule with the smallest rank; when the same rule applies at
//! several positions the leftmost occurrence fires first.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::{TokenSeq, WHITESPACE_MARKER};
use crate::error::{Error, Result};

/// Header line of a merges file whose rules are stage-major controlled rules.
pub const STAGE_MAJOR_HEADER: &str = "#stage-major v1";

/// Merge stages of a controlled table, in priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// `Ġ` + 1 letter, from `(Ġ, x)`.
    G1,
    /// 2 letters, from `(x, y)`.
    C2,
    /// `Ġ` + 2 letters, from `(Ġx, y)`.
    G2,
    /// 3 letters, from `(xy, z)`.
    C3,
    /// `Ġ` + 3 letters, from `(Ġx, yz)`.
    G3,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::G1, Stage::C2, Stage::G2, Stage::C3, Stage::G3];

    /// Classifies a rule by the shape of its operands.
    pub fn of_rule(left: &str, right: &str) -> Option<Stage> {
        let (l_marked, l_body) = super::split_marker(left);
        if right.starts_with(WHITESPACE_MARKER) {
            return None;
        }
        let l = l_body.chars().count();
        let r = right.chars().count();
        match (l_marked, l, r) {
            (true, 0, 1) => Some(Stage::G1),
            (false, 1, 1) => Some(Stage::C2),
            (true, 1, 1) => Some(Stage::G2),
            (false, 2, 1) => Some(Stage::C3),
            (true, 1, 2) => Some(Stage::G3),
            _ => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::G1 => "G1",
            Stage::C2 => "C2",
            Stage::G2 => "G2",
            Stage::C3 => "C3",
            Stage::G3 => "G3",
        };
        f.write_str(s)
    }
}

/// A merge rule as seen from outside the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub rank: u32,
    pub stage: Option<Stage>,
}

/// Priority of a rule, ordered so that stronger merges compare greater.
///
/// A present rule has strength `number_of_rules - rank`; a missing rule is
/// weaker than every present one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strength {
    NoRule,
    Rule(u32),
}

/// Symbol id reserved for characters outside an open table's symbol set.
pub(crate) const UNKNOWN_SYMBOL: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
pub(crate) struct Symbols {
    strings: Vec<String>,
    index: FxHashMap<String, u32>,
    chars: FxHashMap<char, u32>,
}

impl Symbols {
    pub(crate) fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_string());
        self.index.insert(s.to_string(), id);
        let mut it = s.chars();
        if let (Some(c), None) = (it.next(), it.next()) {
            self.chars.insert(c, id);
        }
        id
    }

    pub(crate) fn get(&self, s: &str) -> Option<u32> {
        self.index.get(s).copied()
    }

    pub(crate) fn char_id(&self, c: char) -> Option<u32> {
        self.chars.get(&c).copied()
    }

    pub(crate) fn string(&self, id: u32) -> &str {
        &self.strings[id as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.strings.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Rule {
    pub(crate) left: u32,
    pub(crate) right: u32,
    pub(crate) merged: u32,
    pub(crate) stage: Option<Stage>,
}

/// One segment of a word during merging: a symbol and its byte span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Unit {
    pub(crate) sym: u32,
    pub(crate) start: u32,
    pub(crate) end: u32,
}

/// An ordered merge table.
#[derive(Debug, Clone)]
pub struct MergeTable {
    symbols: Arc<Symbols>,
    rules: Vec<Rule>,
    ranks: FxHashMap<(u32, u32), u32>,
    /// `None` accepts any character; unknown characters simply never merge.
    alphabet: Option<BTreeSet<char>>,
}

impl MergeTable {
    /// Builds a table whose rank order is the iteration order of `pairs`.
    /// The alphabet is open.
    pub fn from_pairs<I, L, R>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (L, R)>,
        L: AsRef<str>,
        R: AsRef<str>,
    {
        Self::build(pairs.into_iter().map(|(l, r)| (l, r, None)))
    }

    /// Like [`MergeTable::from_pairs`] but with explicit stages.
    pub fn from_staged_pairs<I, L, R>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (L, R, Stage)>,
        L: AsRef<str>,
        R: AsRef<str>,
    {
        Self::build(pairs.into_iter().map(|(l, r, s)| (l, r, Some(s))))
    }

    fn build<I, L, R>(pairs: I) -> Result<Self>
    where
        I: Iterator<Item = (L, R, Option<Stage>)>,
        L: AsRef<str>,
        R: AsRef<str>,
    {
        let mut symbols = Symbols::default();
        let mut rules = Vec::new();
        for (l, r, stage) in pairs {
            let (l, r) = (l.as_ref(), r.as_ref());
            if l.is_empty() || r.is_empty() {
                return Err(Error::InvalidArgument(format!("empty operand in rule ({l:?}, {r:?})")));
            }
            for c in l.chars().chain(r.chars()) {
                symbols.intern(c.encode_utf8(&mut [0; 4]));
            }
            let left = symbols.intern(l);
            let right = symbols.intern(r);
            let merged = symbols.intern(&format!("{l}{r}"));
            rules.push(Rule {
                left,
                right,
                merged,
                stage,
            });
        }
        Self::from_parts(Arc::new(symbols), rules, None)
    }

    pub(crate) fn from_parts(
        symbols: Arc<Symbols>,
        rules: Vec<Rule>,
        alphabet: Option<BTreeSet<char>>,
    ) -> Result<Self> {
        let mut ranks = FxHashMap::with_capacity_and_hasher(rules.len(), Default::default());
        for (rank, rule) in rules.iter().enumerate() {
            if ranks.insert((rule.left, rule.right), rank as u32).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate merge rule ({:?}, {:?})",
                    symbols.string(rule.left),
                    symbols.string(rule.right)
                )));
            }
        }
        Ok(MergeTable {
            symbols,
            rules,
            ranks,
            alphabet,
        })
    }

    /// Restricts the table to a closed base alphabet; words containing other
    /// characters are rejected by [`MergeTable::apply`].
    pub fn with_alphabet(mut self, alphabet: impl IntoIterator<Item = char>) -> Self {
        let alphabet: BTreeSet<char> = alphabet.into_iter().collect();
        let symbols = Arc::make_mut(&mut self.symbols);
        for &c in &alphabet {
            symbols.intern(c.encode_utf8(&mut [0; 4]));
        }
        self.alphabet = Some(alphabet);
        self
    }

    pub fn alphabet(&self) -> Option<&BTreeSet<char>> {
        self.alphabet.as_ref()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Whether every rule carries a stage and stages are non-decreasing in
    /// rank order.
    pub fn is_stage_major(&self) -> bool {
        let mut prev = None;
        for r in &self.rules {
            match (prev, r.stage) {
                (_, None) => return false,
                (Some(p), Some(s)) if s < p => return false,
                (_, s) => prev = s,
            }
        }
        !self.rules.is_empty()
    }

    pub fn rule(&self, rank: u32) -> Option<MergeRule> {
        self.rules.get(rank as usize).map(|r| MergeRule {
            left: self.symbols.string(r.left).to_string(),
            right: self.symbols.string(r.right).to_string(),
            rank,
            stage: r.stage,
        })
    }

    pub fn rules(&self) -> impl Iterator<Item = MergeRule> + '_ {
        (0..self.rules.len() as u32).filter_map(move |i| self.rule(i))
    }

    pub fn rank(&self, left: &str, right: &str) -> Option<u32> {
        let l = self.symbols.get(left)?;
        let r = self.symbols.get(right)?;
        self.ranks.get(&(l, r)).copied()
    }

    pub fn strength(&self, left: &str, right: &str) -> Strength {
        match self.rank(left, right) {
            Some(rank) => Strength::Rule(self.rules.len() as u32 - rank),
            None => Strength::NoRule,
        }
    }

    pub(crate) fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    /// Splits a word into single-character units.
    pub(crate) fn units(&self, word: &str) -> Result<Vec<Unit>> {
        let mut units = Vec::with_capacity(word.len());
        for (pos, ch) in word.char_indices() {
            let sym = match self.symbols.char_id(ch) {
                Some(id) if self.alphabet.as_ref().is_none_or(|a| a.contains(&ch)) => id,
                _ if self.alphabet.is_none() => UNKNOWN_SYMBOL,
                _ => {
                    return Err(Error::UncoverableSymbol {
                        symbol: ch,
                        word: word.to_string(),
                    })
                }
            };
            units.push(Unit {
                sym,
                start: pos as u32,
                end: (pos + ch.len_utf8()) as u32,
            });
        }
        Ok(units)
    }

    /// Runs greedy merging in place.
    pub(crate) fn merge_units(&self, units: &mut Vec<Unit>) {
        while self.step(units).is_some() {}
    }

    /// Fires the single highest-priority applicable merge, returning its
    /// `(rank, position)`.
    pub(crate) fn step(&self, units: &mut Vec<Unit>) -> Option<(u32, usize)> {
        let mut best: Option<(u32, usize)> = None;
        for i in 0..units.len().saturating_sub(1) {
            if let Some(&rank) = self.ranks.get(&(units[i].sym, units[i + 1].sym)) {
                if best.is_none_or(|(b, _)| rank < b) {
                    best = Some((rank, i));
                }
            }
        }
        let (rank, i) = best?;
        let right = units.remove(i + 1);
        units[i].sym = self.rules[rank as usize].merged;
        units[i].end = right.end;
        best
    }

    /// Segments one pretokenized word.
    pub fn apply(&self, word: &str) -> Result<TokenSeq> {
        let mut units = self.units(word)?;
        self.merge_units(&mut units);
        Ok(units
            .iter()
            .map(|u| word[u.start as usize..u.end as usize].to_string())
            .collect())
    }

    /// Segments a word and records the sequence after every merge, starting
    /// with the character split.
    pub fn apply_traced(&self, word: &str) -> Result<Vec<(Option<MergeRule>, TokenSeq)>> {
        let mut units = self.units(word)?;
        let render = |units: &[Unit]| -> TokenSeq {
            units
                .iter()
                .map(|u| word[u.start as usize..u.end as usize].to_string())
                .collect()
        };
        let mut steps = vec![(None, render(&units))];
        while let Some((rank, _)) = self.step(&mut units) {
            steps.push((self.rule(rank), render(&units)));
        }
        Ok(steps)
    }
}

/// Strength of the merge `(left, right)` in `table`.
pub fn merge_strength(table: &MergeTable, left: &str, right: &str) -> Strength {
    table.strength(left, right)
}

/// Writes one rule per line as `left right`, in rank order. Stage-major
/// tables get the [`STAGE_MAJOR_HEADER`] line first.
pub fn write_merges(table: &MergeTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, merges_to_string(table)).map_err(|e| Error::io(path, e))
}

pub fn merges_to_string(table: &MergeTable) -> String {
    let mut out = String::new();
    if table.is_stage_major() {
        out.push_str(STAGE_MAJOR_HEADER);
        out.push('\n');
    }
    for r in &table.rules {
        out.push_str(table.symbols.string(r.left));
        out.push(' ');
        out.push_str(table.symbols.string(r.right));
        out.push('\n');
    }
    out
}

pub fn read_merges(path: impl AsRef<Path>) -> Result<MergeTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_merges(&text, path)
}

pub(crate) fn parse_merges(text: &str, path: &Path) -> Result<MergeTable> {
    let mut lines = text.lines().enumerate().peekable();
    let staged = matches!(lines.peek(), Some((_, l)) if *l == STAGE_MAJOR_HEADER);
    if staged {
        lines.next();
    }
    let mut pairs = Vec::new();
    let mut last_stage = None;
    for (i, line) in lines {
        let mut parts = line.split(' ');
        let (Some(l), Some(r), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(path, i + 1, "expected `left right`"));
        };
        if l.is_empty() || r.is_empty() {
            return Err(Error::parse(path, i + 1, "empty operand"));
        }
        let stage = if staged {
            let s = Stage::of_rule(l, r)
                .ok_or_else(|| Error::parse(path, i + 1, "rule does not fit any controlled stage"))?;
            if last_stage.is_some_and(|p| s < p) {
                return Err(Error::parse(path, i + 1, "stage order violates stage-major ranking"));
            }
            last_stage = Some(s);
            Some(s)
        } else {
            None
        };
        pairs.push((l.to_string(), r.to_string(), stage));
    }
    MergeTable::build(pairs.into_iter()).map_err(|e| Error::parse(path, 0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bc_before_cd() -> MergeTable {
        MergeTable::from_pairs([
            ("Ġ", "a"),
            ("b", "c"),
            ("c", "d"),
            ("Ġa", "b"),
            ("bc", "d"),
            ("Ġa", "bc"),
        ])
        .unwrap()
    }

    fn cd_before_bc() -> MergeTable {
        MergeTable::from_pairs([
            ("Ġ", "a"),
            ("c", "d"),
            ("b", "c"),
            ("Ġa", "b"),
            ("bc", "d"),
            ("Ġa", "bc"),
        ])
        .unwrap()
    }

    #[test]
    fn bc_before_cd_yields_ga_bcd() {
        assert_eq!(bc_before_cd().apply("Ġabcd").unwrap(), vec!["Ġa", "bcd"]);
    }

    #[test]
    fn cd_before_bc_yields_gab_cd() {
        assert_eq!(cd_before_bc().apply("Ġabcd").unwrap(), vec!["Ġab", "cd"]);
    }

    #[test]
    fn trace_follows_the_worked_example() {
        let steps = bc_before_cd().apply_traced("Ġabcd").unwrap();
        let seqs: Vec<Vec<String>> = steps.iter().map(|(_, s)| s.clone()).collect();
        assert_eq!(
            seqs,
            vec![
                vec!["Ġ", "a", "b", "c", "d"],
                vec!["Ġa", "b", "c", "d"],
                vec!["Ġa", "bc", "d"],
                vec!["Ġa", "bcd"],
            ]
        );
        let fired: Vec<u32> = steps.iter().filter_map(|(r, _)| r.as_ref().map(|r| r.rank)).collect();
        assert_eq!(fired, vec![0, 1, 4]);
    }

    #[test]
    fn word_without_rules_stays_split() {
        assert_eq!(bc_before_cd().apply("x").unwrap(), vec!["x"]);
        assert_eq!(bc_before_cd().apply("xy").unwrap(), vec!["x", "y"]);
        assert_eq!(bc_before_cd().apply("").unwrap(), Vec::<String>::new());
    }

    #[test]
    fn closed_alphabet_rejects_unknown_symbols() {
        let t = bc_before_cd().with_alphabet(['Ġ', 'a', 'b', 'c', 'd']);
        match t.apply("abz") {
            Err(Error::UncoverableSymbol { symbol, .. }) => assert_eq!(symbol, 'z'),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn leftmost_occurrence_fires_first() {
        let t = MergeTable::from_pairs([("a", "a")]).unwrap();
        assert_eq!(t.apply("aaa").unwrap(), vec!["aa", "a"]);
        assert_eq!(t.apply("aaaa").unwrap(), vec!["aa", "aa"]);
    }

    #[test]
    fn strength_orders_inversely_to_rank() {
        let t = bc_before_cd();
        assert!(t.strength("Ġ", "a") > t.strength("Ġa", "bc"));
        assert!(merge_strength(&t, "b", "c") > merge_strength(&t, "c", "d"));
        assert_eq!(t.strength("Ġ", "a"), Strength::Rule(6));
        assert_eq!(t.strength("x", "y"), Strength::NoRule);
        assert!(Strength::NoRule < t.strength("Ġa", "bc"));
    }

    #[test]
    fn duplicate_rules_are_rejected() {
        assert!(MergeTable::from_pairs([("a", "b"), ("a", "b")]).is_err());
    }

    #[test]
    fn stage_classification() {
        assert_eq!(Stage::of_rule("Ġ", "a"), Some(Stage::G1));
        assert_eq!(Stage::of_rule("a", "b"), Some(Stage::C2));
        assert_eq!(Stage::of_rule("Ġa", "b"), Some(Stage::G2));
        assert_eq!(Stage::of_rule("ab", "c"), Some(Stage::C3));
        assert_eq!(Stage::of_rule("Ġd", "ef"), Some(Stage::G3));
        assert_eq!(Stage::of_rule("a", "bc"), None);
        assert_eq!(Stage::of_rule("Ġab", "c"), None);
    }

    #[test]
    fn merges_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("merges.txt");
        let t = bc_before_cd();
        write_merges(&t, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("Ġ a\nb c\n"));
        let back = read_merges(&path).unwrap();
        assert_eq!(back.rules().collect::<Vec<_>>(), t.rules().collect::<Vec<_>>());
    }

    #[test]
    fn staged_file_carries_header_and_validates_order() {
        let t = MergeTable::from_staged_pairs([
            ("Ġ", "a", Stage::G1),
            ("a", "b", Stage::C2),
            ("Ġa", "b", Stage::G2),
        ])
        .unwrap();
        let text = merges_to_string(&t);
        assert!(text.starts_with(STAGE_MAJOR_HEADER));
        let back = parse_merges(&text, Path::new("m")).unwrap();
        assert!(back.is_stage_major());
        let bad = format!("{STAGE_MAJOR_HEADER}\na b\nĠ a\n");
        assert!(parse_merges(&bad, Path::new("m")).is_err());
    }
}
