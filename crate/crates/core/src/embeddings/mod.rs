//! Token embeddings: a skip-gram trainer and the matrix exchange format.

mod matrix;
mod sgns;

pub use matrix::{EmbeddingMatrix, FORMAT_VERSION, HEADER_LEN, MAGIC};
pub use sgns::{cosine, train_embeddings, SgnsConfig, TrainedEmbeddings};
