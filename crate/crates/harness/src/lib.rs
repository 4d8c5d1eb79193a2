//! Experiments, statistics and reports for the teaching pipeline.

pub mod error;
pub mod experiment;
pub mod human;
pub mod metrics;
pub mod report;
pub mod wilcoxon;

pub use error::{HarnessError, Result};
pub use experiment::{
    run_synthetic_experiment, ExperimentConfig, ExperimentReport, Setting, StudentKind,
};
pub use metrics::reward_improvement;
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
