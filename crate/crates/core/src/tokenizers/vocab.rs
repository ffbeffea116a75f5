use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::WHITESPACE_MARKER;
use crate::corpus::checksum64;
use crate::error::{Error, Result};

/// Bijective token string ↔ id map with ids contiguous from 0.
///
/// On disk: one token per line, line number = id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary; the marker may only appear token-initially and
    /// tokens may not contain line breaks.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            validate_token(t)?;
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::DuplicateToken(t.clone()));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.tokens.iter().enumerate().map(|(i, t)| (i as u32, t.as_str()))
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    /// Checksum of the serialized vocab file.
    pub fn file_hash(&self) -> u64 {
        checksum64(self.to_file_string().as_bytes())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let body = text.strip_suffix('\n').unwrap_or(&text);
        if body.is_empty() && text.is_empty() {
            return Vocabulary::new(Vec::new());
        }
        let tokens: Vec<String> = body.split('\n').map(str::to_owned).collect();
        for (i, t) in tokens.iter().enumerate() {
            if let Err(e) = validate_token(t) {
                return Err(Error::parse(path, i + 1, e.to_string()));
            }
        }
        Vocabulary::new(tokens).map_err(|e| Error::parse(path, 0, e.to_string()))
    }
}

fn validate_token(t: &str) -> Result<()> {
    if t.is_empty() {
        return Err(Error::InvalidToken {
            token: t.to_string(),
            reason: "empty token",
        });
    }
    if t.contains(['\n', '\r']) {
        return Err(Error::InvalidToken {
            token: t.to_string(),
            reason: "line break inside token",
        });
    }
    if t.chars().skip(1).any(|c| c == WHITESPACE_MARKER) {
        return Err(Error::InvalidToken {
            token: t.to_string(),
            reason: "whitespace marker after the first position",
        });
    }
    Ok(())
}
