use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: no items left after joining inputs")]
    EmptyDataset { path: PathBuf },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("features not in vocabulary: {}", .0.join(", "))]
    VocabularyMismatch(Vec<String>),

    #[error("value {value} outside [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate vector: zero norm")]
    DegenerateVector,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero-norm {kind} rows at indices {indices:?}")]
    ZeroRows { kind: &'static str, indices: Vec<usize> },

    #[error("{kind} index {index} out of range (len {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("non-finite reward {0}")]
    NonFiniteReward(f64),

    #[error("environment file: {0}")]
    Format(String),

    #[error("environment file: checksum mismatch (expected {expected}, found {found})")]
    Checksum { expected: String, found: String },

    #[error("environment file: unsupported format version {0}")]
    Version(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Precondition(_) | Error::VocabularyMismatch(_) => {
                ErrorClass::Config
            }
            Error::DimensionMismatch { .. } | Error::IndexOutOfRange { .. } => ErrorClass::Config,
            Error::Consistency(_) | Error::NonFiniteReward(_) => ErrorClass::Internal,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
