//! Deterministic environments, scenario sampling and closed-loop rollouts.

pub mod expert;
pub mod parking;
pub mod writing;

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::rng;
use crate::types::{ActionVector, AgentTag, RewardSpec, Scenario, Schema, StateVector, Trajectory};

pub use expert::{scripted_parking_expert, writing_expert, ExpertOutcome, ScriptedParkingExpert};
pub use parking::ParkingParams;
pub use writing::WritingParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "env", rename_all = "lowercase")]
pub enum EnvSpec {
    Parking(ParkingParams),
    Writing(WritingParams),
}

impl EnvSpec {
    pub fn parking() -> Self {
        EnvSpec::Parking(ParkingParams::default())
    }

    pub fn writing() -> Self {
        EnvSpec::Writing(WritingParams::default())
    }

    pub fn for_schema(schema: Schema) -> Self {
        match schema {
            Schema::Parking6 => Self::parking(),
            Schema::Writing2 => Self::writing(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvSpec::Parking(_) => "parking",
            EnvSpec::Writing(_) => "writing",
        }
    }

    pub fn schema(&self) -> Schema {
        match self {
            EnvSpec::Parking(_) => Schema::Parking6,
            EnvSpec::Writing(_) => Schema::Writing2,
        }
    }

    pub fn step(&self, s: &StateVector, a: &ActionVector) -> StateVector {
        match self {
            EnvSpec::Parking(p) => parking::step(s, a, p),
            EnvSpec::Writing(p) => writing::step(s, a, p),
        }
    }

    /// True when the state lies inside the lot or canvas.
    pub fn in_bounds(&self, s: &StateVector) -> bool {
        match self {
            EnvSpec::Parking(p) => parking::in_lot(s, p),
            EnvSpec::Writing(p) => p.in_canvas(s),
        }
    }

    /// Early termination test. Writing rounds end on pen release or horizon.
    pub fn is_success(&self, scenario: &Scenario, s: &StateVector) -> bool {
        match (self, &scenario.reward_spec) {
            (EnvSpec::Parking(p), RewardSpec::GoalPose { goal }) => parking::is_success(s, goal, p),
            _ => false,
        }
    }

    /// Scenario reward of a visited state sequence (`s_0 .. s_T`).
    pub fn scenario_reward(&self, scenario: &Scenario, states: &[StateVector]) -> f64 {
        match (self, &scenario.reward_spec) {
            (EnvSpec::Parking(p), RewardSpec::GoalPose { goal }) => match states.last() {
                Some(s) => parking::reward(s, goal, p),
                None => parking::reward(&scenario.initial_state, goal, p),
            },
            (EnvSpec::Writing(p), RewardSpec::GlyphSequence { gold, .. }) => {
                writing::trace_reward(&writing::states_to_points(states), gold, p)
            }
            _ => -1.0,
        }
    }

    pub fn trajectory_reward(&self, traj: &Trajectory) -> f64 {
        let mut states = traj.states();
        if traj.terminal.is_none() {
            if let Some((s, a)) = traj.steps.last() {
                states.push(self.step(s, a));
            }
        }
        self.scenario_reward(&traj.scenario, &states)
    }

    pub fn default_horizon(&self) -> usize {
        match self {
            EnvSpec::Parking(p) => p.horizon,
            EnvSpec::Writing(p) => p.horizon_for(p.max_glyphs * 250),
        }
    }

    pub fn check_schema(&self, schema: Schema) -> Result<()> {
        if schema == self.schema() {
            Ok(())
        } else {
            Err(CoreError::UnsupportedSchema {
                expected: self.schema(),
                found: schema,
            })
        }
    }

    pub fn writing_scenario(&self, id: &str, glyphs: Vec<String>) -> Result<Scenario> {
        let EnvSpec::Writing(p) = self else {
            return Err(CoreError::UnsupportedSchema {
                expected: Schema::Writing2,
                found: self.schema(),
            });
        };
        let gold = p.gold_trace(&glyphs)?;
        Ok(Scenario {
            id: id.to_string(),
            schema: Schema::Writing2,
            initial_state: StateVector(gold[0].to_vec()),
            horizon: p.horizon_for(gold.len()),
            reward_spec: RewardSpec::GlyphSequence { glyphs, gold },
        })
    }

    pub fn parking_scenario(&self, id: &str, heading: f64, goal: StateVector) -> Result<Scenario> {
        let EnvSpec::Parking(p) = self else {
            return Err(CoreError::UnsupportedSchema {
                expected: Schema::Parking6,
                found: self.schema(),
            });
        };
        Ok(Scenario {
            id: id.to_string(),
            schema: Schema::Parking6,
            initial_state: parking::goal_pose(0.0, 0.0, heading),
            reward_spec: RewardSpec::GoalPose { goal },
            horizon: p.horizon,
        })
    }

    /// Seeded scenario pool. Parking scenarios differ in initial heading and
    /// goal spot (bottom-right quadrant, nose-in or back-in). Writing
    /// scenarios are glyph sequences of length 1 to `max_glyphs`.
    pub fn sample_scenarios(&self, count: usize, seed: u64) -> Result<Vec<Scenario>> {
        if count == 0 {
            return Err(CoreError::InvalidParameter("scenario count must be >= 1".into()));
        }
        let mut r = rng::derive(seed, "scenarios");
        let width = count.to_string().len().max(3);
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let id = format!("{}-{:0width$}", self.name(), i, width = width);
            let sc = match self {
                EnvSpec::Parking(p) => {
                    let heading = r.gen_range(-PI..PI);
                    let gx = p.lot.spot_x[r.gen_range(0..p.lot.spot_x.len())];
                    let gh = if r.gen_bool(p.lot.back_in_prob) { -FRAC_PI_2 } else { FRAC_PI_2 };
                    self.parking_scenario(&id, heading, parking::goal_pose(gx, p.lot.spot_y, gh))?
                }
                EnvSpec::Writing(p) => {
                    let alphabet = p.alphabet();
                    let len = r.gen_range(1..=p.max_glyphs);
                    let glyphs = (0..len)
                        .map(|_| alphabet[r.gen_range(0..alphabet.len())].clone())
                        .collect();
                    self.writing_scenario(&id, glyphs)?
                }
            };
            out.push(sc);
        }
        Ok(out)
    }
}

/// A closed-loop controller.
pub trait Policy {
    fn act(&self, state: &StateVector, scenario: &Scenario) -> ActionVector;
}

impl<F> Policy for F
where
    F: Fn(&StateVector, &Scenario) -> ActionVector,
{
    fn act(&self, state: &StateVector, scenario: &Scenario) -> ActionVector {
        self(state, scenario)
    }
}

/// Runs `policy` from the scenario's initial state for at most `horizon`
/// steps, stopping early on success.
pub fn rollout(
    policy: &dyn Policy,
    scenario: &Scenario,
    env: &EnvSpec,
    horizon: usize,
    agent_tag: AgentTag,
) -> Result<Trajectory> {
    env.check_schema(scenario.schema)?;
    let mut s = scenario.initial_state.clone();
    let mut steps = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let a = policy.act(&s, scenario);
        if !a.is_finite() {
            return Err(CoreError::NonFiniteAction { step: t });
        }
        let a = match env {
            EnvSpec::Parking(_) => a.clamped_unit(),
            EnvSpec::Writing(_) => a,
        };
        let next = env.step(&s, &a);
        steps.push((s, a));
        s = next;
        if env.is_success(scenario, &s) {
            break;
        }
    }
    finish(scenario, env, steps, s, agent_tag)
}

pub(crate) fn finish(
    scenario: &Scenario,
    env: &EnvSpec,
    steps: Vec<(StateVector, ActionVector)>,
    terminal: StateVector,
    agent_tag: AgentTag,
) -> Result<Trajectory> {
    if steps.is_empty() {
        return Err(CoreError::EmptyTrajectory(scenario.id.clone()));
    }
    let mut traj = Trajectory {
        id: Trajectory::default_id(agent_tag, &scenario.id),
        scenario: scenario.clone(),
        agent_tag,
        steps,
        terminal: Some(terminal),
        reward: 0.0,
    };
    traj.reward = env.trajectory_reward(&traj);
    Ok(traj)
}

/// Replays `actions` from `initial`, returning the visited states including
/// the final one.
pub fn replay(env: &EnvSpec, initial: &StateVector, actions: &[ActionVector]) -> Vec<StateVector> {
    let mut out = Vec::with_capacity(actions.len() + 1);
    let mut s = initial.clone();
    for a in actions {
        let n = env.step(&s, a);
        out.push(s);
        s = n;
    }
    out.push(s);
    out
}
