use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("coincident points have no defined bearing")]
    CoincidentPoints,

    #[error("length mismatch: weights have {weights} entries, snapshot has {samples}")]
    LengthMismatch { weights: usize, samples: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{total} codes cannot be split evenly among {users} users")]
    UnevenCodeSplit { total: u32, users: u32 },

    #[error("MCS table: {0}")]
    McsTable(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
