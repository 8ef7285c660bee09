use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by graph construction, simulation and evaluation.
#[derive(Debug, Error)]
pub enum HozError {
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("empty zone")]
    EmptyZone,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("target category {0} is absent from the environment")]
    TargetAbsent(usize),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("duplicate scene label {0}")]
    DuplicateScene(usize),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("corrupt log record at {path}:{line}: {reason}")]
    CorruptLog {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("parse error in {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("path already exists: {0} (use --force to overwrite)")]
    PathCollision(PathBuf),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = HozError> = std::result::Result<T, E>;

impl HozError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HozError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        HozError::Parse {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}
