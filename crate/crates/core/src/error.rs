use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance `{instance}` is infeasible: {reason}")]
    Infeasible { instance: String, reason: String },

    #[error("missing PPL entry for pair ({0}, {1})")]
    MissingPpl(usize, usize),

    #[error("metric unavailable: {0}")]
    MetricUnavailable(String),

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("backward already ran on this tape")]
    StaleTape,

    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss((usize, usize)),

    #[error("every position is masked")]
    EmptyAction,

    #[error("oracle refuses {segments} segments (cap {cap}); use `sam` for larger instances")]
    OracleTooLarge { segments: usize, cap: usize },

    #[error("non-finite value during training at epoch {epoch}, batch {batch}: {detail}")]
    NonFinite {
        epoch: usize,
        batch: usize,
        detail: String,
    },

    #[error("{path}: {msg}")]
    Validation { path: String, msg: String },

    #[error("{}:{line}:{column}: {msg}", file.display())]
    InstanceFile {
        file: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
