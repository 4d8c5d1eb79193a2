//! Scripted demonstrators.

use crate::envs::parking::{self, ExpertGains, ParkingParams};
use crate::envs::{finish, rollout, EnvSpec, Policy};
use crate::error::{CoreError, Result};
use crate::types::{ActionVector, AgentTag, RewardSpec, Scenario, Schema, StateVector};
use crate::Trajectory;

#[derive(Clone, Debug, Default)]
pub struct ScriptedParkingExpert {
    pub params: ParkingParams,
    pub gains: ExpertGains,
}

impl Policy for ScriptedParkingExpert {
    fn act(&self, state: &StateVector, scenario: &Scenario) -> ActionVector {
        match scenario.goal() {
            Some(goal) => parking::expert_action(state, goal, &self.params, &self.gains),
            None => ActionVector::new(0.0, 0.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExpertOutcome {
    pub trajectory: Trajectory,
    pub success: bool,
}

pub fn scripted_parking_expert(scenario: &Scenario, params: &ParkingParams) -> Result<ExpertOutcome> {
    let expert = ScriptedParkingExpert {
        params: params.clone(),
        gains: ExpertGains::default(),
    };
    let env = EnvSpec::Parking(params.clone());
    let trajectory = rollout(&expert, scenario, &env, scenario.horizon, AgentTag::Expert)?;
    let success = env.is_success(scenario, trajectory.terminal.as_ref().unwrap());
    Ok(ExpertOutcome { trajectory, success })
}

/// Traces the gold stroke exactly.
pub fn writing_expert(scenario: &Scenario, env: &EnvSpec) -> Result<Trajectory> {
    env.check_schema(scenario.schema)?;
    let RewardSpec::GlyphSequence { gold, .. } = &scenario.reward_spec else {
        return Err(CoreError::UnsupportedSchema {
            expected: Schema::Writing2,
            found: scenario.schema,
        });
    };
    if gold.len() < 2 {
        return Err(CoreError::EmptyTrajectory(scenario.id.clone()));
    }
    let mut steps = Vec::with_capacity(gold.len() - 1);
    let mut s = StateVector(gold[0].to_vec());
    for w in gold.windows(2) {
        let a = ActionVector([w[1][0] - w[0][0], w[1][1] - w[0][1]]);
        let n = env.step(&s, &a);
        steps.push((s, a));
        s = n;
    }
    finish(scenario, env, steps, s, AgentTag::Expert)
}
