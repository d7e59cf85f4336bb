use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the learning engine.
#[derive(Debug, Error)]
pub enum OdaError {
    /// Caller supplied arguments that violate an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// Inputs are well-formed but carry no usable information (e.g. all-zero weights).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A dataset or model file could not be parsed.
    #[error("load error in {path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// An internal invariant was observed to be broken.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl OdaError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub(crate) fn load(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Load {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Degenerate(_) => 1,
            Self::Load { .. } | Self::Io(_) => 2,
            Self::Invariant(_) => 3,
        }
    }
}

pub type Result<T, E = OdaError> = std::result::Result<T, E>;
