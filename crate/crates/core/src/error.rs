use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, PsedError>;

#[derive(Debug, Error)]
pub enum PsedError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular system in {context}")]
    Singular { context: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl PsedError {
    pub fn singular(context: impl Into<String>) -> Self {
        PsedError::Singular {
            context: context.into(),
        }
    }

    /// True for errors that come from numerics rather than user input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, PsedError::Singular { .. } | PsedError::Domain(_))
    }
}
