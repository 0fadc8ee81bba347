use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("field is not zero on the boundary (max |value| = {0:e})")]
    BoundaryNotZero(f64),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time window [{start}, {end}] runs backwards")]
    BackwardWindow { start: f64, end: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("state became non-finite at t = {t}")]
    Diverged { t: f64 },
    #[error("coupling matrix is not diagonalizable over the reals: {0}")]
    Coupling(String),
    #[error("grid of {0} nodes per axis is too large for the dense oracle")]
    OracleTooLarge(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
