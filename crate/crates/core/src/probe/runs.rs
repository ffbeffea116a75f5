//! Whole-letter probe runs: dataset construction, split, training and
//! held-out evaluation for one letter, and the 26-letter sweep.

use crate::corpus::SeedSpec;
use crate::embeddings::EmbeddingMatrix;
use crate::error::Result;
use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::probedata::{
    build_dataset, context_group_folds, six_group_partition, token_len, ContextSide, MatchingMode, ProbeDataset,
    ProbeExample, SixGroup,
};
use crate::tokenizers::Vocabulary;

use super::train::{predict, split_dataset, train_probe, EvalCounts, TrainConfig};

#[derive(Debug, Clone)]
pub struct ProbeSetup<'a> {
    pub vocab: &'a Vocabulary,
    /// Candidate token ids, normally `filter_vocab(vocab)`.
    pub ids: &'a [u32],
    pub mode: MatchingMode,
    pub test_fraction: f64,
    /// Training hyperparameters; its seed field is replaced per letter.
    pub train: TrainConfig,
    pub seed: SeedSpec,
}

#[derive(Debug, Clone)]
pub struct LetterRun {
    pub letter: char,
    pub train: ProbeDataset,
    pub test: ProbeDataset,
    /// Held-out predictions aligned with `test.examples`.
    pub predictions: Vec<bool>,
    pub counts: EvalCounts,
}

/// Seeds derive from `setup.seed` and the letter, so each letter's run is
/// independent of which other letters are probed and in what order.
pub fn probe_letter(emb: &EmbeddingMatrix, setup: &ProbeSetup<'_>, letter: char) -> Result<LetterRun> {
    let seed = setup.seed.child(&letter.to_string());
    let data = build_dataset(setup.vocab, setup.ids, letter, setup.mode, &mut seed.child("data").stream(0))?;
    let (train, test) = split_dataset(&data, setup.test_fraction, &seed.child("split"));
    let mut cfg = setup.train.clone();
    cfg.seed = seed.child("train");
    let model = train_probe(emb, &train, &cfg)?;
    let predictions = predict(&model, emb, &test.examples)?;
    let counts = EvalCounts::from_predictions(data.target_char, &test.examples, &predictions);
    Ok(LetterRun {
        letter: data.target_char,
        train,
        test,
        predictions,
        counts,
    })
}

/// Runs every letter, in parallel when the feature is enabled. Results are
/// returned in the order of `letters`.
pub fn probe_letters(emb: &EmbeddingMatrix, setup: &ProbeSetup<'_>, letters: &[char]) -> Result<Vec<LetterRun>> {
    crate::par_map_indexed(letters, |_, &l| probe_letter(emb, setup, l)).into_iter().collect()
}

/// Mean of the accuracy on positives and the accuracy on negatives.
pub fn balanced_accuracy(examples: &[ProbeExample], predictions: &[bool]) -> Option<f64> {
    let (mut tp, mut p, mut tn, mut n) = (0u64, 0u64, 0u64, 0u64);
    for (e, &pred) in examples.iter().zip(predictions) {
        if e.label {
            p += 1;
            tp += u64::from(pred);
        } else {
            n += 1;
            tn += u64::from(!pred);
        }
    }
    (p > 0 && n > 0).then(|| 0.5 * (tp as f64 / p as f64 + tn as f64 / n as f64))
}

/// k-fold cross-validation over context-group folds; counts summed over the
/// held-out folds.
pub fn probe_context_folds(
    emb: &EmbeddingMatrix,
    data: &ProbeDataset,
    side: ContextSide,
    k: usize,
    train: &TrainConfig,
    seed: &SeedSpec,
) -> Result<EvalCounts> {
    let spec = context_group_folds(data, side, k, &mut seed.child("folds").stream(0))?;
    let mut total = EvalCounts::default();
    for f in 0..k {
        let (tr, ev) = spec.split(f);
        let pick = |idx: &[usize]| data.with_examples(idx.iter().map(|&i| data.examples[i].clone()).collect());
        let (tr, ev) = (pick(&tr), pick(&ev));
        let mut cfg = train.clone();
        cfg.seed = seed.child(&format!("fold{f}"));
        let model = train_probe(emb, &tr, &cfg)?;
        let preds = predict(&model, emb, &ev.examples)?;
        total.merge(&EvalCounts::from_predictions(data.target_char, &ev.examples, &preds));
    }
    Ok(total)
}

/// One probe per positional group: the group's positives against an equal
/// number of length-matched negatives drawn from the same dataset. Groups
/// with fewer than two matched positives are skipped.
pub fn probe_six_groups(
    emb: &EmbeddingMatrix,
    data: &ProbeDataset,
    test_fraction: f64,
    train: &TrainConfig,
    seed: &SeedSpec,
) -> Result<Vec<(SixGroup, EvalCounts)>> {
    let groups = six_group_partition(data.positives(), data.target_char)?;
    let mut negatives: BTreeMap<usize, Vec<ProbeExample>> = BTreeMap::new();
    for e in data.negatives() {
        negatives.entry(token_len(&e.token)).or_default().push(e.clone());
    }
    let mut out = Vec::new();
    for (group, positives) in groups {
        let gseed = seed.child(&format!("{}{}", if group.marked { "g" } else { "p" }, group.position));
        let mut rng = gseed.child("negatives").stream(0);
        let mut by_len: BTreeMap<usize, Vec<ProbeExample>> = BTreeMap::new();
        for p in positives {
            by_len.entry(token_len(&p.token)).or_default().push(p);
        }
        let mut examples = Vec::new();
        for (len, pos) in by_len {
            let mut pool = negatives.get(&len).cloned().unwrap_or_default();
            pool.shuffle(&mut rng);
            let n = pos.len().min(pool.len());
            examples.extend(pos.into_iter().take(n));
            examples.extend(pool.into_iter().take(n));
        }
        if examples.len() < 4 {
            continue;
        }
        let sub = data.with_examples(examples);
        let (tr, te) = split_dataset(&sub, test_fraction, &gseed.child("split"));
        let mut cfg = train.clone();
        cfg.seed = gseed.child("train");
        let model = train_probe(emb, &tr, &cfg)?;
        let preds = predict(&model, emb, &te.examples)?;
        out.push((group, EvalCounts::from_predictions(data.target_char, &te.examples, &preds)));
    }
    Ok(out)
}
