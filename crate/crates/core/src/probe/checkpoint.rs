//! Probe checkpoints: magic `CPMP`, version u32, dim/h1/h2 as u32, then the
//! flat parameter vector as f32, all little-endian.

use std::fs;
use std::path::Path;

use super::mlp::{ProbeMlp, Shape};
use crate::error::{Error, Result};

const MAGIC: [u8; 4] = *b"CPMP";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

pub fn checkpoint_bytes(model: &ProbeMlp<f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * model.params.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [model.shape.dim, model.shape.h1, model.shape.h2] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for p in &model.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<ProbeMlp<f32>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    let found: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if found != MAGIC {
        return Err(Error::BadMagic { expected: MAGIC, found });
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    if u32_at(4) != VERSION {
        return Err(Error::UnsupportedVersion {
            expected: VERSION,
            found: u32_at(4),
        });
    }
    let shape = Shape {
        dim: u32_at(8) as usize,
        h1: u32_at(12) as usize,
        h2: u32_at(16) as usize,
    };
    let expected = (HEADER_LEN + 4 * shape.param_count()) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len() as u64,
        });
    }
    let params: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    if let Some(i) = params.iter().position(|p| !p.is_finite()) {
        return Err(Error::NonFiniteValue { row: 0, col: i });
    }
    Ok(ProbeMlp::from_params(shape, params).expect("length checked"))
}

pub fn write_checkpoint(model: &ProbeMlp<f32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<ProbeMlp<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_bytes(&bytes)
}
