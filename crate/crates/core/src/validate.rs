//! Replay check of stored trajectories against the deterministic dynamics.

use serde::{Deserialize, Serialize};

use crate::envs::EnvSpec;
use crate::error::{CoreError, Result};
use crate::types::{Schema, Trajectory};

pub const TRANSITION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    SchemaMismatch { expected: Schema, found: Schema },
    WrongDimension { index: usize, len: usize },
    NonFinite { index: usize },
    /// `index` is the state that disagrees with the replayed transition.
    TransitionMismatch { index: usize, error: f64 },
    InitialStateMismatch { error: f64 },
    BoundaryEscape { index: usize },
    HeadingNotUnit { index: usize },
    HorizonOverflow { len: usize, horizon: usize },
    PositiveReward { reward: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_mismatch(&self) -> Option<usize> {
        self.violations.iter().find_map(|v| match v {
            Violation::TransitionMismatch { index, .. } => Some(*index),
            _ => None,
        })
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            match v {
                Violation::HorizonOverflow { len, horizon } => {
                    write!(f, "horizon overflow ({len} > {horizon})")?
                }
                Violation::TransitionMismatch { index, error } => {
                    write!(f, "transition mismatch at state {index} (error {error:.3e})")?
                }
                other => write!(f, "{other:?}")?,
            }
        }
        Ok(())
    }
}

/// Checks a trajectory against `env`. Errors only on an empty trajectory;
/// every other problem is reported as a violation.
pub fn validate_trajectory(traj: &Trajectory, env: &EnvSpec) -> Result<ValidationReport> {
    if traj.is_empty() {
        return Err(CoreError::EmptyTrajectory(traj.id.clone()));
    }
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    if traj.scenario.schema != env.schema() {
        v.push(Violation::SchemaMismatch {
            expected: env.schema(),
            found: traj.scenario.schema,
        });
        return Ok(report);
    }
    if traj.len() > traj.scenario.horizon {
        v.push(Violation::HorizonOverflow {
            len: traj.len(),
            horizon: traj.scenario.horizon,
        });
    }
    if traj.reward > 0.0 || traj.reward.is_nan() {
        v.push(Violation::PositiveReward { reward: traj.reward });
    }
    let dim = env.schema().state_dim();
    let states = traj.states();
    for (i, s) in states.iter().enumerate() {
        if s.len() != dim {
            v.push(Violation::WrongDimension { index: i, len: s.len() });
            return Ok(report);
        }
        if !s.is_finite() {
            v.push(Violation::NonFinite { index: i });
            return Ok(report);
        }
        if !env.in_bounds(s) {
            v.push(Violation::BoundaryEscape { index: i });
        }
        if env.schema() == Schema::Parking6 && (s[4] * s[4] + s[5] * s[5] - 1.0).abs() > 1e-6 {
            v.push(Violation::HeadingNotUnit { index: i });
        }
    }
    if traj.steps.iter().any(|(_, a)| !a.is_finite()) {
        let index = traj.steps.iter().position(|(_, a)| !a.is_finite()).unwrap();
        v.push(Violation::NonFinite { index });
        return Ok(report);
    }
    let e0 = traj.scenario.initial_state.max_abs_diff(&states[0]);
    if e0 > TRANSITION_TOLERANCE {
        v.push(Violation::InitialStateMismatch { error: e0 });
    }
    for t in 0..traj.len() {
        let Some(next) = states.get(t + 1) else { break };
        let pred = env.step(&traj.steps[t].0, &traj.steps[t].1);
        let err = pred.max_abs_diff(next);
        if err > TRANSITION_TOLERANCE {
            v.push(Violation::TransitionMismatch { index: t + 1, error: err });
            break;
        }
    }
    Ok(report)
}
