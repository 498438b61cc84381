use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("duplicate id {id:?} on lines {first_line} and {second_line}")]
    DuplicateId { id: String, first_line: usize, second_line: usize },

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch { expected: usize, actual: usize, context: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty gold fact set")]
    EmptyGoldFacts,

    #[error("agreement is undefined: {0}")]
    DegenerateAgreement(String),

    #[error("non-finite loss {loss} at step {step}: {diagnostics}")]
    NonFiniteLoss { loss: f64, step: usize, diagnostics: String },

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
