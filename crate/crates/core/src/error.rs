use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum NcaError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("time {time} is not on the grid with step {dt}")]
    Grid { time: f64, dt: f64 },

    #[error("grid error: {0}")]
    GridLayout(String),

    #[error("{source_name}:{line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("invalid state: {0}")]
    State(String),

    #[error("solution diverged at step {step}")]
    Divergence { step: usize },

    #[error("numerical failure at step {step}: {reason}")]
    Numerics { step: usize, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = NcaError> = std::result::Result<T, E>;
