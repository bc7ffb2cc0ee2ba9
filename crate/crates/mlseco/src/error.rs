//! Crate-wide error type with a coarse input/config/internal split that the
//! CLI maps onto its exit-code contract.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("ARFF parse error at line {line}: {message}")]
    Arff { line: usize, message: String },

    #[error("label header error: {0}")]
    LabelHeader(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit code bucket: 2 for unreadable/malformed inputs, 3 for
    /// configuration problems, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Arff { .. } | Error::LabelHeader(_) | Error::Dataset(_) => 2,
            Error::Json(_) => 2,
            Error::Config(_) => 3,
            Error::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
