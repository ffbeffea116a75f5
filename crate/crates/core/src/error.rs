use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { path: PathBuf, offset: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("vocab_size {requested} is smaller than the base alphabet ({base} symbols)")]
    VocabTooSmall { requested: usize, base: usize },

    #[error("symbol {symbol:?} in word {word:?} is not covered by the merge table's alphabet")]
    UncoverableSymbol { symbol: char, word: String },

    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),

    #[error("no embedding row for vocabulary token {0:?}")]
    MissingRow(String),

    #[error("invalid token {token:?}: {reason}")]
    InvalidToken { token: String, reason: &'static str },

    #[error("duplicate token {0:?} in vocabulary")]
    DuplicateToken(String),

    #[error("no unique replacement left for word types: {}", .types.join(", "))]
    CollisionExhaustion { types: Vec<String> },

    #[error("word type {0:?} has no entry in the substitution map")]
    UnmappedWord(String),

    #[error("no tokens containing {target:?} in the vocabulary")]
    NoPositives { target: char },

    #[error("no tokens without {target:?} in the vocabulary")]
    NoNegatives { target: char },

    #[error("token {token:?} has {len} letters; the controlled vocabulary allows at most 3")]
    ControlledVocabViolation { token: String, len: usize },

    #[error("only {found} context groups for {target:?}, need at least {k}")]
    TooFewContextGroups { target: char, found: usize, k: usize },

    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    IdOutOfRange { id: u32, vocab_size: usize },

    #[error("non-finite loss at batch {batch}")]
    NonFiniteLoss { batch: usize },

    #[error("matrix contains a non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("bad magic bytes {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {found}, expected {expected}")]
    UnsupportedVersion { expected: u32, found: u32 },

    #[error("truncated file: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("vocabulary hash mismatch: matrix records {recorded:#018x}, vocabulary is {actual:#018x}")]
    VocabHashMismatch { recorded: u64, actual: u64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("need at least 3 distinct pairs for a rank correlation, found {0}")]
    TooFewPairs(usize),

    #[error("pattern {pattern} needs a binding for {slot}")]
    UnboundLetter {
        pattern: &'static str,
        slot: &'static str,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
