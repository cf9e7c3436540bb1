use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = MovdaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MovdaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Margin sign disagrees with the recorded outcome.
    #[error("margin {t_mov} is inconsistent with outcome score {score}")]
    SignMismatch { t_mov: f64, score: f64 },

    #[error("data integrity error in game {game_id}: {reason}")]
    DataIntegrity { game_id: String, reason: String },

    #[error("games out of chronological order at game {game_id}")]
    Ordering { game_id: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parameter {param} is not identifiable: {reason}")]
    Unidentifiable { param: &'static str, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("row {row}, column `{column}`: {reason}")]
    Schema {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MovdaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MovdaError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MovdaError::Io {
            path: path.into(),
            source,
        }
    }
}
