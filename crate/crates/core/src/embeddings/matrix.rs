//! The embedding matrix and its binary file format.
//!
//! Layout, all little-endian: magic `CPEM`, version u32, vocab_size u64,
//! dim u32, vocab_hash u64, then `vocab_size * dim` f32 values row-major.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tokenizers::Vocabulary;

pub const MAGIC: [u8; 4] = *b"CPEM";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    vocab_size: usize,
    dim: usize,
    data: Vec<f32>,
    pub vocab_hash: u64,
}

impl EmbeddingMatrix {
    pub fn new(vocab_size: usize, dim: usize, data: Vec<f32>, vocab_hash: u64) -> Result<Self> {
        if data.len() != vocab_size * dim {
            return Err(Error::Shape(format!(
                "{} values for a {vocab_size} x {dim} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: i / dim,
                col: i % dim,
            });
        }
        Ok(EmbeddingMatrix {
            vocab_size,
            dim,
            data,
            vocab_hash,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, id: u32) -> &[f32] {
        let i = id as usize * self.dim;
        &self.data[i..i + self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.vocab_size as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&self.vocab_hash.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let truncated = |expected: usize| Error::Truncated {
            expected: expected as u64,
            actual: bytes.len() as u64,
        };
        if bytes.len() < 4 {
            return Err(truncated(HEADER_LEN));
        }
        let mut found = [0u8; 4];
        found.copy_from_slice(&bytes[..4]);
        if found != MAGIC {
            return Err(Error::BadMagic { expected: MAGIC, found });
        }
        if bytes.len() < HEADER_LEN {
            return Err(truncated(HEADER_LEN));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                expected: FORMAT_VERSION,
                found: version,
            });
        }
        let vocab_size = u64_at(8);
        let dim = u32_at(16) as u64;
        let vocab_hash = u64_at(20);
        let expected = vocab_size
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(4))
            .and_then(|n| n.checked_add(HEADER_LEN as u64))
            .ok_or_else(|| Error::Shape(format!("{vocab_size} x {dim} overflows")))?;
        if (bytes.len() as u64) < expected {
            return Err(Error::Truncated {
                expected,
                actual: bytes.len() as u64,
            });
        }
        if (bytes.len() as u64) > expected {
            return Err(Error::Shape(format!(
                "{} trailing bytes after the matrix",
                bytes.len() as u64 - expected
            )));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Self::new(vocab_size as usize, dim as usize, data, vocab_hash)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Reads a matrix and refuses it unless it was built for `vocab`.
    pub fn read_for(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<Self> {
        let m = Self::read(path)?;
        m.check_vocab(vocab)?;
        Ok(m)
    }

    pub fn check_vocab(&self, vocab: &Vocabulary) -> Result<()> {
        let actual = vocab.file_hash();
        if actual != self.vocab_hash {
            return Err(Error::VocabHashMismatch {
                recorded: self.vocab_hash,
                actual,
            });
        }
        if vocab.len() != self.vocab_size {
            return Err(Error::Shape(format!(
                "matrix has {} rows, vocabulary has {} tokens",
                self.vocab_size,
                vocab.len()
            )));
        }
        Ok(())
    }

    /// Imports a whitespace-separated text matrix (`token v1 … vdim` per
    /// line) and orders its rows by `vocab`. A leading `count dim` line is
    /// skipped; rows for tokens outside the vocabulary are ignored; every
    /// vocabulary token must have a row.
    pub fn from_text(text: &str, vocab: &Vocabulary, path: &Path) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut rows: Vec<Option<Vec<f32>>> = vec![None; vocab.len()];
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if i == 0 && values.len() == 1 && token.parse::<u64>().is_ok() && values[0].parse::<u64>().is_ok() {
                continue;
            }
            let values = values
                .iter()
                .map(|v| v.parse::<f32>())
                .collect::<std::result::Result<Vec<f32>, _>>()
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            match dim {
                None if values.is_empty() => return Err(Error::parse(path, i + 1, "row has no values")),
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::parse(path, i + 1, format!("expected {d} values, found {}", values.len())))
                }
                Some(_) => {}
            }
            if let Some(id) = vocab.id(token) {
                rows[id as usize] = Some(values);
            }
        }
        let dim = dim.ok_or(Error::Empty("text matrix"))?;
        let mut data = Vec::with_capacity(vocab.len() * dim);
        for (id, row) in rows.into_iter().enumerate() {
            let row = row.ok_or_else(|| Error::MissingRow(vocab.token(id as u32).expect("in range").to_string()))?;
            data.extend(row);
        }
        Self::new(vocab.len(), dim, data, vocab.file_hash())
    }
}
