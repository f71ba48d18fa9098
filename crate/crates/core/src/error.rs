use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the training pipeline.
#[derive(Debug, Error)]
pub enum HdcError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("invalid index {index}: {reason}")]
    InvalidIndex { index: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("aggregation failed: {0}")]
    Aggregation(String),

    #[error("{path}: {field}: {message}")]
    Parse {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, HdcError>;

impl HdcError {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        HdcError::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HdcError::Io {
            path: path.into(),
            source,
        }
    }
}
