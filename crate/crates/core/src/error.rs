use thiserror::Error;

use crate::types::Schema;

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("trajectory `{0}` has no steps")]
    EmptyTrajectory(String),

    #[error("unsupported schema {found:?}, expected {expected:?}")]
    UnsupportedSchema { expected: Schema, found: Schema },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid skill segmentation: {0}")]
    InvalidSegmentation(String),

    #[error("extractor has not been fitted")]
    Unfitted,

    #[error("no labels for trajectory `{0}`")]
    UnknownTrajectory(String),

    #[error("no student trajectory for scenario `{0}`")]
    MissingStudentTrajectory(String),

    #[error("no expert labels for scenario `{0}`")]
    MissingExpertLabels(String),

    #[error("reward {reward} for scenario `{scenario}` is positive; rewards must be <= 0")]
    PositiveReward { scenario: String, reward: f64 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("policy produced a non-finite action at step {step}")]
    NonFiniteAction { step: usize },

    #[error("record {index}: {message}")]
    Record { index: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
