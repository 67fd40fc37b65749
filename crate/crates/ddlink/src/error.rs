//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. The variants
//! separate caller mistakes (bad arguments, violated preconditions) from
//! numerical failures (singular systems) and from the I/O and configuration
//! errors raised by the harness, so binaries can map them to distinct exit
//! codes.

use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument was malformed on its own (wrong length, unsupported value).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Arguments were individually valid but violated a documented
    /// relationship, such as a channel delay exceeding the CP budget.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A linear system had no usable solution.
    #[error("singular system: {0}")]
    Singular(String),

    /// Scenario or config-file validation failed.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem failure while reading or writing harness artifacts.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand used at argument-validation sites.
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Shorthand used at precondition checks.
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Shorthand for wrapping I/O failures with the offending path.
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
