use thiserror::Error;

pub type Result<T, E = StudentError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum StudentError {
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Core(#[from] teachkit_core::CoreError),
}
