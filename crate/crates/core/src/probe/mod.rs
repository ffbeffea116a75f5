//! The character-inclusion probe: an MLP over frozen token embeddings,
//! evaluated per letter and micro-averaged.

mod checkpoint;
mod mlp;
mod runs;
mod train;

pub use checkpoint::{checkpoint_bytes, checkpoint_from_bytes, read_checkpoint, write_checkpoint};
pub use mlp::{bce_with_logit, selu, selu_grad, sigmoid, Masks, ProbeMlp, Shape, Workspace, SELU_ALPHA, SELU_LAMBDA};
pub use runs::{balanced_accuracy, probe_context_folds, probe_letter, probe_letters, probe_six_groups, LetterRun, ProbeSetup};
pub use train::{eval_probe, micro_average, predict, split_dataset, train_probe, EvalCounts, TrainConfig};
