use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: cannot parse {text:?} as a sample value")]
    Parse {
        path: PathBuf,
        line: usize,
        text: String,
    },

    #[error("{path}: manifest error: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("{path}: file contains no samples")]
    EmptyFile { path: PathBuf },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signal of length {len} is too short: {needed}")]
    TooShort { len: usize, needed: String },

    #[error("inconsistent decomposition: {0}")]
    Bookkeeping(String),

    #[error("filter bank failed validation: {0}")]
    FilterBank(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("{source_id}: {source}")]
    Segment {
        source_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Attach the offending segment's id to a pipeline error.
    pub fn in_segment(self, source_id: &str) -> Self {
        Error::Segment {
            source_id: source_id.to_string(),
            source: Box::new(self),
        }
    }

    /// True for failures caused by the filesystem or malformed input files,
    /// as opposed to numerical pipeline failures.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Manifest { .. } | Error::EmptyFile { .. } => true,
            Error::Segment { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
