//! Synthetic students: goal-conditioned feed-forward policies trained by
//! behavior cloning on expert parking demonstrations.

pub mod checkpoint;
pub mod dataset;
pub mod error;
pub mod features;
pub mod mlp;
pub mod optim;
pub mod policy;
pub mod train;

pub use dataset::{filter_reverse, BcDataset};
pub use error::{Result, StudentError};
pub use mlp::Mlp;
pub use policy::{rollout, rollout_many, StudentPolicy};
pub use train::{bc_train, eval_mse, fine_tune, TrainConfig};
