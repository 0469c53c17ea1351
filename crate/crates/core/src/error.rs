use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("dataset is already normalized")]
    AlreadyNormalized,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("softmax row {0} is fully masked")]
    Mask(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trajectory has {len} points, model accepts at most {max}")]
    Length { len: usize, max: usize },
    #[error("non-finite value at step {step}: {msg}")]
    Numeric { step: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
