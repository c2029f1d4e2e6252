use thiserror::Error;

/// Errors raised by configuration checks, world setup and contract violations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is invalid. `key` names the offending field.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// The world could not be built from an otherwise valid configuration.
    #[error("setup failed: {0}")]
    Setup(String),

    /// Reading or writing a file failed.
    #[error("{0}")]
    Io(String),

    /// An operation was called outside its precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
