use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the test pipeline.
#[derive(Debug, Error)]
pub enum RenalError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("{path}:{line}: {message}")]
    Validation {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("thinning bound violated: intensity {intensity} exceeds bound {bound} at t = {time}")]
    BoundViolation {
        time: f64,
        intensity: f64,
        bound: f64,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl RenalError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RenalError::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RenalError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the data rather than by the caller's configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            RenalError::InsufficientData(_)
                | RenalError::DegenerateData(_)
                | RenalError::Parse { .. }
                | RenalError::Validation { .. }
                | RenalError::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, RenalError>;
