use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("trajectory too short: need at least {min} waypoints, got {got}")]
    TooShort { min: usize, got: usize },

    #[error("index {index} out of range for {len} waypoints")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("{count} candidate timings exceed the cap of {cap}; use a coarser duration step")]
    CapExceeded { count: u128, cap: usize },

    #[error("no valid grid point: {0}")]
    NoValidGridPoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the computation itself rather than of its inputs.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::UndefinedCorrelation(_) | Error::Numeric(_) | Error::NoValidGridPoint(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
