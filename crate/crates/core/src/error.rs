use std::path::PathBuf;

/// Errors produced anywhere in the simulation stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },
    #[error("invalid state: {0}")]
    State(&'static str),
    #[error("non-finite gradient in layer {layer}")]
    NonFinite { layer: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}{context}")]
    Divergence { epoch: usize, context: String },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: String, expected: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dims(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::Dimension {
            expected: expected.into(),
            got: got.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by numerics (NaN, divergence, collapse) rather
    /// than usage.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::Divergence { .. } | Error::Degenerate(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
