use std::io;
use std::path::PathBuf;

use crate::setfun::Subset;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A call violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// A family or parameter object could not be built from its inputs.
    #[error("construction error: {0}")]
    Construction(String),

    /// Exhaustive validation found the function is not monotone submodular.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("numeric error on subset {subset}: {message}")]
    Numeric { subset: Subset, message: String },

    /// The instance is too large for exhaustive processing.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn construction(msg: impl Into<String>) -> Error {
    Error::Construction(msg.into())
}
