//! Skip-gram with negative sampling over token-id sequences.
//!
//! Follows word2vec: a dynamic window (each center draws an effective radius
//! in 1..=window), negatives from the unigram distribution raised to 0.75,
//! linearly decaying learning rate, optional frequent-token subsampling.
//! Training is single-threaded so one stream fixes every bit of the result.

use rand::Rng;
use rand_distr::{Distribution, WeightedAliasIndex};

use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::tokenizers::TokenizedCorpus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f32,
    /// Subsampling threshold `t`; 0 disables. A token with relative
    /// frequency f is kept with probability `sqrt(t/f) + t/f`.
    pub subsample: f64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 128,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            subsample: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedEmbeddings {
    pub matrix: EmbeddingMatrix,
    /// Mean loss per (center, context) pair, one entry per epoch.
    pub epoch_losses: Vec<f64>,
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn train_embeddings<R: Rng + ?Sized>(
    corpus: &TokenizedCorpus,
    config: &SgnsConfig,
    rng: &mut R,
) -> Result<TrainedEmbeddings> {
    let v = corpus.vocab.len();
    let dim = config.dim;
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("dim must be at least 2, got {dim}")));
    }
    if config.window == 0 || config.epochs == 0 {
        return Err(Error::InvalidArgument("window and epochs must be positive".into()));
    }
    let counts = corpus.frequencies();
    if let Some(&id) = corpus.docs.iter().flatten().find(|&&id| id as usize >= v) {
        return Err(Error::IdOutOfRange { id, vocab_size: v });
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    let noise = WeightedAliasIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75)).collect())
        .map_err(|e| Error::InvalidArgument(format!("noise distribution: {e}")))?;
    let keep_prob: Vec<f64> = counts
        .iter()
        .map(|&c| {
            if config.subsample <= 0.0 || c == 0 {
                return 1.0;
            }
            let r = config.subsample / (c as f64 / total as f64);
            (r.sqrt() + r).min(1.0)
        })
        .collect();

    let mut w_in: Vec<f32> = (0..v * dim).map(|_| (rng.gen::<f32>() - 0.5) / dim as f32).collect();
    let mut w_out = vec![0f32; v * dim];
    let mut grad = vec![0f32; dim];
    let planned = (total * config.epochs as u64) as f64;
    let mut seen = 0u64;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut sentence: Vec<u32> = Vec::new();

    for _ in 0..config.epochs {
        let mut loss_sum = 0f64;
        let mut pairs = 0u64;
        for doc in &corpus.docs {
            sentence.clear();
            for &id in doc {
                let p = keep_prob[id as usize];
                if p >= 1.0 || rng.gen::<f64>() < p {
                    sentence.push(id);
                }
            }
            let lr = config.learning_rate * (1.0 - seen as f64 / planned).max(1e-4) as f32;
            seen += doc.len() as u64;
            for (i, &center) in sentence.iter().enumerate() {
                let radius = rng.gen_range(1..=config.window);
                let lo = i.saturating_sub(radius);
                let hi = (i + radius).min(sentence.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let context = sentence[j];
                    let ci = center as usize * dim;
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for n in 0..=config.negatives {
                        let (target, label) = if n == 0 {
                            (context, 1.0f32)
                        } else {
                            let t = noise.sample(rng) as u32;
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let ti = target as usize * dim;
                        let score = dot(&w_in[ci..ci + dim], &w_out[ti..ti + dim]);
                        let s = sigmoid(score);
                        // log-loss of the binary decision, clamped away from log(0)
                        let p = if label > 0.5 { s } else { 1.0 - s };
                        loss_sum -= (p.max(1e-7) as f64).ln();
                        let g = lr * (label - s);
                        for k in 0..dim {
                            grad[k] += g * w_out[ti + k];
                            w_out[ti + k] += g * w_in[ci + k];
                        }
                    }
                    for k in 0..dim {
                        w_in[ci + k] += grad[k];
                    }
                    pairs += 1;
                }
            }
        }
        let mean = if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 };
        if !mean.is_finite() {
            return Err(Error::NonFiniteLoss { batch: epoch_losses.len() });
        }
        epoch_losses.push(mean);
    }
    let matrix = EmbeddingMatrix::new(v, dim, w_in, corpus.vocab.file_hash())?;
    Ok(TrainedEmbeddings { matrix, epoch_losses })
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let d = dot(a, b) as f64;
    let na = dot(a, a).sqrt() as f64;
    let nb = dot(b, b).sqrt() as f64;
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        d / (na * nb)
    }
}
