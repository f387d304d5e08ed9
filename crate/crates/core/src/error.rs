use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical quantity outside its accepted range.
    #[error("{field} out of range: {value} ({reason})")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// The SMO solver ran out of iterations before the KKT gap closed.
    #[error("solver did not converge after {iterations} iterations (max KKT violation {max_violation:.3e})")]
    Convergence {
        iterations: usize,
        max_violation: f64,
    },

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code: 1 for input faults, 2 for algorithmic non-success.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } | Error::Capacity(_) | Error::UndefinedCorrelation(_) => 2,
            _ => 1,
        }
    }
}
