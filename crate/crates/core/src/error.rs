use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the mimicry stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate range for landmark {landmark} on axis {axis}")]
    DegenerateRange { landmark: usize, axis: char },

    #[error("non-finite value produced by node {node} ({layer})")]
    Numeric { node: usize, layer: String },

    #[error("invalid state: {0}")]
    State(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("checksum mismatch for {}", path.display())]
    Checksum { path: PathBuf },

    #[error("rig mismatch: expected {expected}, found {found}")]
    RigMismatch { expected: String, found: String },

    #[error("malformed {what}: {detail}")]
    Format { what: String, detail: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: impl Into<String>, detail: impl ToString) -> Self {
        Error::Format {
            what: what.into(),
            detail: detail.to_string(),
        }
    }
}
