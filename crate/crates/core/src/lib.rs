//! Tools for measuring how subword tokenization and corpus structure put
//! character-level information into token embeddings.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`corpus`]: corpus files and seeded random streams
//! - [`tokenizers`]: trained BPE, the controlled tokenizer, three-character
//!   segmentation, and word tokens
//! - [`transforms`]: character perturbation, word substitution, token
//!   substitution, stemming, lemmatization
//! - [`probedata`]: character-inclusion probe datasets
//! - [`embeddings`]: skip-gram embeddings and the matrix file format
//! - [`probe`]: the MLP probe and its evaluation
//! - [`analysis`]: boundary statistics and segmentation condition checks

pub mod analysis;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod probe;
pub mod probedata;
pub mod tokenizers;
pub mod transforms;

pub use error::{Error, Result};

/// Maps `f` over `items` with their indices, in parallel when the
/// `parallel` feature is on. Output order always matches input order.
pub(crate) fn par_map_indexed<T: Sync, U: Send>(items: &[T], f: impl Fn(usize, &T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
    }
}
