//! Domain values shared by every module. All of them are plain immutable
//! data once constructed.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// State layout of an environment.
///
/// * `parking6`: `(x m, y m, vx m/s, vy m/s, cos_h, sin_h)`
/// * `writing2`: `(x px, y px)`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    Parking6,
    Writing2,
}

impl Schema {
    pub fn state_dim(self) -> usize {
        match self {
            Schema::Parking6 => 6,
            Schema::Writing2 => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        StateVector(values.into())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        if self.0.len() != other.0.len() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Two-component control. Parking: `(steering, acceleration)` in `[-1, 1]`.
/// Writing: pen displacement `(dx, dy)` in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionVector(pub [f64; 2]);

impl ActionVector {
    pub fn new(a: f64, b: f64) -> Self {
        ActionVector([a, b])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn clamped_unit(&self) -> Self {
        ActionVector([self.0[0].clamp(-1.0, 1.0), self.0[1].clamp(-1.0, 1.0)])
    }
}

/// What the reward of a scenario is measured against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardSpec {
    /// Parking: terminal pose compared with a goal state.
    GoalPose { goal: StateVector },
    /// Writing: rasterized overlap with the gold trace of a glyph sequence.
    GlyphSequence {
        glyphs: Vec<String>,
        gold: Vec<[f64; 2]>,
    },
}

/// An `(initial state, reward)` pair plus an episode horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub schema: Schema,
    pub initial_state: StateVector,
    pub reward_spec: RewardSpec,
    pub horizon: usize,
}

impl Scenario {
    pub fn goal(&self) -> Option<&StateVector> {
        match &self.reward_spec {
            RewardSpec::GoalPose { goal } => Some(goal),
            RewardSpec::GlyphSequence { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentTag {
    Expert,
    Student,
    Synthetic,
}

impl AgentTag {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentTag::Expert => "expert",
            AgentTag::Student => "student",
            AgentTag::Synthetic => "synthetic",
        }
    }
}

/// A time-indexed `(state, action)` sequence bound to a scenario.
///
/// `steps[t] = (s_t, a_t)` and `s_{t+1} = f(s_t, a_t)`. The state reached
/// after the last action is kept in `terminal`; it may be omitted in files,
/// in which case it is recovered by replaying the last action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(default)]
    pub id: String,
    pub scenario: Scenario,
    pub agent_tag: AgentTag,
    pub steps: Vec<(StateVector, ActionVector)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<StateVector>,
    /// Scenario reward of the whole trajectory, always `<= 0`.
    pub reward: f64,
}

impl Trajectory {
    pub fn default_id(agent: AgentTag, scenario_id: &str) -> String {
        format!("{}/{}", agent.as_str(), scenario_id)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn actions(&self) -> impl ExactSizeIterator<Item = &ActionVector> + '_ {
        self.steps.iter().map(|(_, a)| a)
    }

    pub fn action_vec(&self) -> Vec<ActionVector> {
        self.actions().copied().collect()
    }

    /// States `s_0 .. s_{T-1}` followed by the terminal state when present.
    pub fn states(&self) -> Vec<StateVector> {
        let mut out: Vec<StateVector> = self.steps.iter().map(|(s, _)| s.clone()).collect();
        if let Some(t) = &self.terminal {
            out.push(t.clone());
        }
        out
    }

    pub fn initial_state(&self) -> Option<&StateVector> {
        self.steps.first().map(|(s, _)| s)
    }
}

/// Skill ids `M` and boundaries `B` partitioning a trajectory:
/// `0 = b_0 < b_1 < ... < b_N = |τ|` and `|M| = |B| - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SkillSegmentation {
    pub skills: Vec<usize>,
    pub boundaries: Vec<usize>,
}

impl SkillSegmentation {
    pub fn new(
        skills: Vec<usize>,
        boundaries: Vec<usize>,
        len: usize,
        latent_dim: usize,
    ) -> Result<Self> {
        let seg = SkillSegmentation { skills, boundaries };
        seg.check(len, latent_dim)?;
        Ok(seg)
    }

    pub fn check(&self, len: usize, latent_dim: usize) -> Result<()> {
        let bad = |m: String| Err(CoreError::InvalidSegmentation(m));
        if self.boundaries.len() < 2 {
            return bad("need at least two boundaries".into());
        }
        if self.skills.len() + 1 != self.boundaries.len() {
            return bad(format!(
                "{} skills but {} boundaries",
                self.skills.len(),
                self.boundaries.len()
            ));
        }
        if self.boundaries[0] != 0 {
            return bad(format!("first boundary is {}, expected 0", self.boundaries[0]));
        }
        let last = *self.boundaries.last().unwrap();
        if last != len {
            return bad(format!("last boundary is {last}, trajectory length is {len}"));
        }
        if let Some(w) = self.boundaries.windows(2).find(|w| w[0] >= w[1]) {
            return bad(format!("boundaries not increasing at {} -> {}", w[0], w[1]));
        }
        if let Some(m) = self.skills.iter().find(|&&m| m >= latent_dim) {
            return bad(format!("skill id {m} >= latent dim {latent_dim}"));
        }
        Ok(())
    }

    pub fn num_segments(&self) -> usize {
        self.skills.len()
    }

    /// `(skill, start, end)` for every segment, `end` exclusive.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.skills
            .iter()
            .zip(self.boundaries.windows(2))
            .map(|(&m, w)| (m, w[0], w[1]))
    }
}

/// Hyperparameters shared by the skill extractors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractorConfig {
    pub latent_dim: usize,
    pub segments_per_demo: usize,
    pub segment_length: usize,
    pub h_min: usize,
    pub h_max: usize,
}

impl ExtractorConfig {
    pub fn parking() -> Self {
        ExtractorConfig {
            latent_dim: 16,
            segments_per_demo: 4,
            segment_length: 10,
            h_min: 5,
            h_max: 40,
        }
    }

    pub fn writing() -> Self {
        ExtractorConfig {
            latent_dim: 24,
            segments_per_demo: 8,
            segment_length: 250,
            h_min: 40,
            h_max: 600,
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.h_min == 0 || self.h_min > self.h_max {
            return Err(CoreError::InvalidParameter(format!(
                "need 1 <= h_min <= h_max, got {} and {}",
                self.h_min, self.h_max
            )));
        }
        if self.h_max >= horizon {
            return Err(CoreError::InvalidParameter(format!(
                "h_max {} must be below the horizon {horizon}",
                self.h_max
            )));
        }
        if self.latent_dim < self.segments_per_demo {
            return Err(CoreError::InvalidParameter(format!(
                "latent_dim {} is smaller than the expected segments per demo {}",
                self.latent_dim, self.segments_per_demo
            )));
        }
        Ok(())
    }
}
