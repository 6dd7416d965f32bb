use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator and the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A size, parameter or option outside its supported range.
    #[error("configuration error: {0}")]
    Config(String),

    /// A call that violates an operation's preconditions (bad qubit index,
    /// odd qubit count for a square grid, mismatched ensembles, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Not enough samples or points to compute a statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("failed to parse circuit at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
