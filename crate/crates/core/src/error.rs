use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate coordinates at nodes {0} and {1} (zero distance under inverse-distance weighting)")]
    DuplicatePoints(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("zero-degree row at vertex {vertex}, instant {instant}: mean normalization undefined (enable self-inclusion)")]
    ZeroDegree { vertex: usize, instant: usize },

    #[error("signal has zero energy")]
    ZeroSignal,

    #[error("non-finite value in {path} at row {row}, column {col}")]
    NonFinite {
        path: PathBuf,
        row: usize,
        col: usize,
    },

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (files, flags) rather than
    /// a failure during computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Parse { .. }
                | Error::Io { .. }
                | Error::Csv { .. }
                | Error::NonFinite { .. }
                | Error::ShapeMismatch(_)
        )
    }
}
