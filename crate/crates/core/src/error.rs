use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed or invalid input data. `row` is zero-based when present.
    #[error("ingestion error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Ingestion { row: Option<usize>, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Invalid parameters or preconditions.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    /// Linear-algebra failure, e.g. a covariance that is not positive-definite.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_row(row: usize, message: impl Into<String>) -> Self {
        Error::Ingestion {
            row: Some(row),
            message: message.into(),
        }
    }

    pub(crate) fn ingest(message: impl Into<String>) -> Self {
        Error::Ingestion {
            row: None,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
