use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] tdope_core::Error),

    /// Invalid configuration; `field` is a path such as `cooling.beta` or `n_t[2]`.
    #[error("invalid config at `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(
        "no universal baseline for N={n_qubits}: reversibility needs the mean cooled entropy of universal \
         circuits with the same cooling settings and seed range; add \"universal\" to n_t or point \
         --baseline at a manifest that contains it ({manifest})"
    )]
    MissingBaseline { n_qubits: usize, manifest: PathBuf },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn config_err(field: impl Into<String>, msg: impl Into<String>) -> HarnessError {
    HarnessError::Config { field: field.into(), msg: msg.into() }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
