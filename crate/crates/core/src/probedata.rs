//! Character-inclusion probe datasets.
//!
//! For a target letter α every filtered vocabulary token is a positive if α
//! occurs in it (ignoring the marker and case) and a negative otherwise.
//! Token length always counts letters after the marker.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tokenizers::{split_marker, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProbeExample {
    pub token: String,
    pub token_id: u32,
    pub label: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchingMode {
    Matched,
    Unmatched,
}

impl fmt::Display for MatchingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchingMode::Matched => "matched",
            MatchingMode::Unmatched => "unmatched",
        })
    }
}

impl FromStr for MatchingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matched" => Ok(MatchingMode::Matched),
            "unmatched" => Ok(MatchingMode::Unmatched),
            _ => Err(Error::InvalidArgument(format!("unknown matching mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeDataset {
    pub target_char: char,
    pub examples: Vec<ProbeExample>,
    pub mode: MatchingMode,
}

/// Letters after the optional marker.
pub fn token_len(token: &str) -> usize {
    split_marker(token).1.chars().count()
}

/// Whether `alpha` occurs in the token body, ignoring case.
pub fn contains_char(token: &str, alpha: char) -> bool {
    let alpha = alpha.to_ascii_lowercase();
    split_marker(token).1.chars().any(|c| c.to_ascii_lowercase() == alpha)
}

fn is_probe_token(token: &str) -> bool {
    let (_, body) = split_marker(token);
    !body.is_empty() && body.bytes().all(|b| b.is_ascii_alphabetic())
}

/// Ids of tokens made of an optional marker and one or more ASCII letters.
pub fn filter_vocab(vocab: &Vocabulary) -> Vec<u32> {
    vocab.iter().filter(|(_, t)| is_probe_token(t)).map(|(id, _)| id).collect()
}

fn check_target(alpha: char) -> Result<char> {
    if alpha.is_ascii_alphabetic() {
        Ok(alpha.to_ascii_lowercase())
    } else {
        Err(Error::InvalidArgument(format!("target {alpha:?} is not an ASCII letter")))
    }
}

/// Builds D(α) over the given token ids.
///
/// Matched mode pairs positives and negatives within each length: both sides
/// are shuffled and the shorter list decides how many pairs survive. Unmatched
/// mode pairs a shuffled positive list with a uniform sample of negatives.
pub fn build_dataset<R: Rng + ?Sized>(
    vocab: &Vocabulary,
    ids: &[u32],
    alpha: char,
    mode: MatchingMode,
    rng: &mut R,
) -> Result<ProbeDataset> {
    let alpha = check_target(alpha)?;
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for &id in ids {
        let token = vocab.token(id).ok_or(Error::IdOutOfRange {
            id,
            vocab_size: vocab.len(),
        })?;
        if !is_probe_token(token) {
            continue;
        }
        let label = contains_char(token, alpha);
        let ex = ProbeExample {
            token: token.to_string(),
            token_id: id,
            label,
        };
        if label {
            positives.push(ex);
        } else {
            negatives.push(ex);
        }
    }
    if positives.is_empty() {
        return Err(Error::NoPositives { target: alpha });
    }
    if negatives.is_empty() {
        return Err(Error::NoNegatives { target: alpha });
    }

    let mut examples = Vec::new();
    match mode {
        MatchingMode::Matched => {
            let mut by_len: BTreeMap<usize, (Vec<ProbeExample>, Vec<ProbeExample>)> = BTreeMap::new();
            for ex in positives {
                by_len.entry(token_len(&ex.token)).or_default().0.push(ex);
            }
            for ex in negatives {
                by_len.entry(token_len(&ex.token)).or_default().1.push(ex);
            }
            for (_, (mut pos, mut neg)) in by_len {
                pos.shuffle(rng);
                neg.shuffle(rng);
                let n = pos.len().min(neg.len());
                examples.extend(pos.into_iter().take(n));
                examples.extend(neg.into_iter().take(n));
            }
        }
        MatchingMode::Unmatched => {
            positives.shuffle(rng);
            negatives.shuffle(rng);
            let n = positives.len().min(negatives.len());
            examples.extend(positives.into_iter().take(n));
            examples.extend(negatives.into_iter().take(n));
        }
    }
    Ok(ProbeDataset {
        target_char: alpha,
        examples,
        mode,
    })
}

impl ProbeDataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn positives(&self) -> impl Iterator<Item = &ProbeExample> {
        self.examples.iter().filter(|e| e.label)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &ProbeExample> {
        self.examples.iter().filter(|e| !e.label)
    }

    /// A dataset with the same target and mode holding `examples`.
    pub fn with_examples(&self, examples: Vec<ProbeExample>) -> ProbeDataset {
        ProbeDataset {
            target_char: self.target_char,
            examples,
            mode: self.mode,
        }
    }

    pub fn to_tsv(&self, seed: u64) -> String {
        let mut out = format!("# target={} mode={} seed={}\n", self.target_char, self.mode, seed);
        for ex in &self.examples {
            out.push_str(&format!("{}\t{}\t{}\n", ex.token, ex.token_id, u8::from(ex.label)));
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>, seed: u64) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv(seed)).map_err(|e| Error::io(path, e))
    }

    /// Parses a dataset file; returns the dataset and the recorded seed.
    pub fn parse_tsv(text: &str, path: &Path) -> Result<(ProbeDataset, u64)> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "missing header"))?;
        let fields: HashMap<&str, &str> = header
            .strip_prefix("# ")
            .ok_or_else(|| Error::parse(path, 1, "header must start with '# '"))?
            .split(' ')
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let field = |k: &str| fields.get(k).copied().ok_or_else(|| Error::parse(path, 1, format!("header lacks {k}")));
        let mut target = field("target")?.chars();
        let target_char = match (target.next(), target.next()) {
            (Some(c), None) => c,
            _ => return Err(Error::parse(path, 1, "target must be one letter")),
        };
        let mode: MatchingMode = field("mode")?.parse()?;
        let seed: u64 = field("seed")?.parse().map_err(|_| Error::parse(path, 1, "bad seed"))?;
        let mut examples = Vec::new();
        for (i, line) in lines {
            let mut cols = line.split('\t');
            let (Some(token), Some(id), Some(label), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
                return Err(Error::parse(path, i + 1, "expected token<TAB>id<TAB>label"));
            };
            let token_id = id.parse().map_err(|_| Error::parse(path, i + 1, "bad token id"))?;
            let label = match label {
                "0" => false,
                "1" => true,
                _ => return Err(Error::parse(path, i + 1, "label must be 0 or 1")),
            };
            examples.push(ProbeExample {
                token: token.to_string(),
                token_id,
                label,
            });
        }
        Ok((
            ProbeDataset {
                target_char,
                examples,
                mode,
            },
            seed,
        ))
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<(ProbeDataset, u64)> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LengthBucket {
    UpTo3,
    L4,
    L5,
    L6,
    AtLeast7,
}

impl LengthBucket {
    pub const ALL: [LengthBucket; 5] = [
        LengthBucket::UpTo3,
        LengthBucket::L4,
        LengthBucket::L5,
        LengthBucket::L6,
        LengthBucket::AtLeast7,
    ];

    pub fn of_len(len: usize) -> Self {
        match len {
            0..=3 => LengthBucket::UpTo3,
            4 => LengthBucket::L4,
            5 => LengthBucket::L5,
            6 => LengthBucket::L6,
            _ => LengthBucket::AtLeast7,
        }
    }

    pub fn of_token(token: &str) -> Self {
        Self::of_len(token_len(token))
    }
}

impl fmt::Display for LengthBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LengthBucket::UpTo3 => "<=3",
            LengthBucket::L4 => "4",
            LengthBucket::L5 => "5",
            LengthBucket::L6 => "6",
            LengthBucket::AtLeast7 => ">=7",
        })
    }
}

/// Splits a dataset by token length into the five buckets, in bucket order.
pub fn length_buckets(dataset: &ProbeDataset) -> Vec<(LengthBucket, ProbeDataset)> {
    LengthBucket::ALL
        .iter()
        .map(|&b| {
            let examples = dataset.examples.iter().filter(|e| LengthBucket::of_token(&e.token) == b).cloned().collect();
            (b, dataset.with_examples(examples))
        })
        .collect()
}

/// Position group of a positive controlled token: marker flag and the
/// 1-based position of the first α among its letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SixGroup {
    pub marked: bool,
    pub position: u8,
}

impl SixGroup {
    pub fn all() -> [SixGroup; 6] {
        let g = |marked, position| SixGroup { marked, position };
        [g(true, 1), g(true, 2), g(true, 3), g(false, 1), g(false, 2), g(false, 3)]
    }

    pub fn of(token: &str, alpha: char) -> Result<Option<SixGroup>> {
        let (marked, body) = split_marker(token);
        let len = body.chars().count();
        if len > 3 {
            return Err(Error::ControlledVocabViolation {
                token: token.to_string(),
                len,
            });
        }
        let alpha = alpha.to_ascii_lowercase();
        Ok(body.chars().position(|c| c.to_ascii_lowercase() == alpha).map(|p| SixGroup {
            marked,
            position: p as u8 + 1,
        }))
    }
}

impl fmt::Display for SixGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ord = ["1st", "2nd", "3rd"][self.position as usize - 1];
        write!(f, "{ord} char {}", if self.marked { "w/ Ġ" } else { "w/o Ġ" })
    }
}

/// Groups positive examples by [`SixGroup`]; all six keys are present.
pub fn six_group_partition<'a, I>(positives: I, alpha: char) -> Result<BTreeMap<SixGroup, Vec<ProbeExample>>>
where
    I: IntoIterator<Item = &'a ProbeExample>,
{
    let mut groups: BTreeMap<SixGroup, Vec<ProbeExample>> = SixGroup::all().into_iter().map(|g| (g, Vec::new())).collect();
    for ex in positives {
        let g = SixGroup::of(&ex.token, alpha)?
            .ok_or_else(|| Error::InvalidArgument(format!("{:?} does not contain {alpha:?}", ex.token)))?;
        groups.get_mut(&g).expect("all groups present").push(ex.clone());
    }
    Ok(groups)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContextSide {
    Preceding,
    Following,
}

impl FromStr for ContextSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prev" | "preceding" => Ok(ContextSide::Preceding),
            "next" | "following" => Ok(ContextSide::Following),
            _ => Err(Error::InvalidArgument(format!("unknown context side {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextKey {
    WordStart,
    Char(char),
    WordEnd,
}

impl fmt::Display for ContextKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextKey::WordStart => f.write_str("word-start"),
            ContextKey::Char(c) => write!(f, "{c}"),
            ContextKey::WordEnd => f.write_str("word-end"),
        }
    }
}

/// The letter next to the first α, or a sentinel at either edge of the token.
pub fn context_of(token: &str, alpha: char, side: ContextSide) -> Option<ContextKey> {
    let alpha = alpha.to_ascii_lowercase();
    let letters: Vec<char> = split_marker(token).1.chars().map(|c| c.to_ascii_lowercase()).collect();
    let i = letters.iter().position(|&c| c == alpha)?;
    Some(match side {
        ContextSide::Preceding if i == 0 => ContextKey::WordStart,
        ContextSide::Preceding => ContextKey::Char(letters[i - 1]),
        ContextSide::Following if i + 1 == letters.len() => ContextKey::WordEnd,
        ContextSide::Following => ContextKey::Char(letters[i + 1]),
    })
}

/// A k-fold split in which each context group lives in exactly one fold.
/// Fold members are indices into the dataset's examples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSpec {
    pub k: usize,
    pub side: ContextSide,
    pub groups: BTreeMap<ContextKey, usize>,
    pub folds: Vec<Vec<usize>>,
}

impl FoldSpec {
    /// `(train, eval)` example indices with fold `eval_fold` held out.
    pub fn split(&self, eval_fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        for (f, members) in self.folds.iter().enumerate() {
            if f != eval_fold {
                train.extend_from_slice(members);
            }
        }
        (train, self.folds[eval_fold].clone())
    }

    /// Largest over smallest fold size.
    pub fn size_ratio(&self) -> f64 {
        let sizes = self.folds.iter().map(Vec::len);
        let max = sizes.clone().max().unwrap_or(0);
        let min = sizes.min().unwrap_or(0);
        if min == 0 {
            f64::INFINITY
        } else {
            max as f64 / min as f64
        }
    }
}

/// Assigns positives to folds by context group and splits the negatives at
/// random into folds of matching sizes.
///
/// Groups are placed largest first, each into the currently smallest fold.
pub fn context_group_folds<R: Rng + ?Sized>(
    dataset: &ProbeDataset,
    side: ContextSide,
    k: usize,
    rng: &mut R,
) -> Result<FoldSpec> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let alpha = dataset.target_char;
    let mut members: BTreeMap<ContextKey, Vec<usize>> = BTreeMap::new();
    let mut negatives = Vec::new();
    for (i, ex) in dataset.examples.iter().enumerate() {
        if ex.label {
            let key = context_of(&ex.token, alpha, side)
                .ok_or_else(|| Error::InvalidArgument(format!("{:?} is labelled positive but lacks {alpha:?}", ex.token)))?;
            members.entry(key).or_default().push(i);
        } else {
            negatives.push(i);
        }
    }
    if members.len() < k {
        return Err(Error::TooFewContextGroups {
            target: alpha,
            found: members.len(),
            k,
        });
    }
    let mut order: Vec<(&ContextKey, &Vec<usize>)> = members.iter().collect();
    order.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut groups = BTreeMap::new();
    for (key, idx) in order {
        let f = (0..k).min_by_key(|&f| (folds[f].len(), f)).expect("k > 0");
        folds[f].extend_from_slice(idx);
        groups.insert(*key, f);
    }
    let pos_sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
    let total_pos: usize = pos_sizes.iter().sum();
    negatives.shuffle(rng);
    // negatives follow the positive fold proportions
    let mut start = 0;
    let mut acc = 0;
    for (f, &size) in pos_sizes.iter().enumerate() {
        acc += size;
        let end = if f + 1 == k { negatives.len() } else { acc * negatives.len() / total_pos };
        folds[f].extend_from_slice(&negatives[start..end]);
        start = end;
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldSpec { k, side, groups, folds })
}
