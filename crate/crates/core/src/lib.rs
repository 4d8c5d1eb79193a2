//! Core library for skill-based assisted teaching of motor control tasks.
//!
//! The crate is organised around the teaching pipeline:
//!
//! * [`types`] holds the shared domain values (states, actions, scenarios,
//!   trajectories, skill segmentations) and [`validate`] / [`infill`]
//!   operate on them.
//! * [`envs`] implements the deterministic Parking and Writing tasks, a
//!   scripted parking expert and closed-loop rollouts.
//! * [`extract`] turns trajectories into skill sequences.
//! * [`curriculum`] selects diverse scenarios, estimates per-skill expertise
//!   and synthesizes individualized drills.
//! * [`io`] reads and writes the JSON interchange formats.

pub mod curriculum;
pub mod envs;
pub mod error;
pub mod extract;
pub mod infill;
pub mod io;
pub mod rng;
pub mod session;
pub mod types;
pub mod validate;

pub use error::{CoreError, Result};
pub use types::{
    ActionVector, AgentTag, ExtractorConfig, RewardSpec, Scenario, Schema, SkillSegmentation,
    StateVector, Trajectory,
};
