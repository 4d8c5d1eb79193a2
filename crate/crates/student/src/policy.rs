//! Closed-loop rollouts of a student network.

use ndarray::Array2;
use teachkit_core::envs::{EnvSpec, Policy};
use teachkit_core::{ActionVector, AgentTag, CoreError, Scenario, StateVector, Trajectory};

use crate::error::Result;
use crate::features::{scenario_features, INPUT_DIM};
use crate::mlp::Mlp;

pub struct StudentPolicy<'a> {
    pub net: &'a Mlp,
}

impl Policy for StudentPolicy<'_> {
    fn act(&self, state: &StateVector, scenario: &Scenario) -> ActionVector {
        let x = Array2::from_shape_vec((1, INPUT_DIM), scenario_features(state, scenario).to_vec())
            .expect("feature shape");
        let y = self.net.forward(x.view());
        ActionVector([y[[0, 0]], y[[0, 1]]])
    }
}

pub fn rollout(net: &Mlp, scenario: &Scenario, env: &EnvSpec) -> Result<Trajectory> {
    Ok(rollout_many(net, std::slice::from_ref(scenario), env)?.remove(0))
}

/// Rolls the network out on every scenario in lockstep, batching the
/// forward passes. Each episode stops on success or at its horizon.
pub fn rollout_many(net: &Mlp, scenarios: &[Scenario], env: &EnvSpec) -> Result<Vec<Trajectory>> {
    for sc in scenarios {
        env.check_schema(sc.schema)?;
    }
    let n = scenarios.len();
    let mut states: Vec<StateVector> = scenarios.iter().map(|s| s.initial_state.clone()).collect();
    let mut steps: Vec<Vec<(StateVector, ActionVector)>> = vec![Vec::new(); n];
    let mut active: Vec<usize> = (0..n).filter(|&i| scenarios[i].horizon > 0).collect();
    let mut t = 0;
    while !active.is_empty() {
        let mut x = Array2::zeros((active.len(), INPUT_DIM));
        for (row, &i) in active.iter().enumerate() {
            let f = scenario_features(&states[i], &scenarios[i]);
            x.row_mut(row).iter_mut().zip(f).for_each(|(d, v)| *d = v);
        }
        let y = net.forward(x.view());
        let mut next_active = Vec::with_capacity(active.len());
        for (row, &i) in active.iter().enumerate() {
            let a = ActionVector([y[[row, 0]], y[[row, 1]]]);
            if !a.is_finite() {
                return Err(CoreError::NonFiniteAction { step: t }.into());
            }
            let a = a.clamped_unit();
            let next = env.step(&states[i], &a);
            let prev = std::mem::replace(&mut states[i], next);
            steps[i].push((prev, a));
            let done = env.is_success(&scenarios[i], &states[i]) || steps[i].len() >= scenarios[i].horizon;
            if !done {
                next_active.push(i);
            }
        }
        active = next_active;
        t += 1;
    }
    let mut out = Vec::with_capacity(n);
    for ((sc, st), s) in scenarios.iter().zip(steps).zip(states) {
        if st.is_empty() {
            return Err(CoreError::EmptyTrajectory(sc.id.clone()).into());
        }
        let mut traj = Trajectory {
            id: Trajectory::default_id(AgentTag::Synthetic, &sc.id),
            scenario: sc.clone(),
            agent_tag: AgentTag::Synthetic,
            steps: st,
            terminal: Some(s),
            reward: 0.0,
        };
        traj.reward = env.trajectory_reward(&traj);
        out.push(traj);
    }
    Ok(out)
}
