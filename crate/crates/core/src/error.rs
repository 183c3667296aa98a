use std::path::PathBuf;

use thiserror::Error;

use crate::sim::FrequencyTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A value outside the domain of an operation (e.g. dispatch above rating).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// The LP engine broke down; `context` lists the bound changes active at the failing node.
    #[error("numerical failure in LP relaxation: {detail} (node bounds: {context})")]
    NumericFailure { detail: String, context: String },

    /// The frequency excursion grew past the instability threshold. The partial trace is kept
    /// so callers can still evaluate limits on it.
    #[error("simulation unstable at t = {time:.3} s (df = {df:.4} p.u.)")]
    Unstable {
        time: f64,
        df: f64,
        trace: Box<FrequencyTrace>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// I/O failure tagged with the path involved.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
