//! Practice-session logs: append-only JSONL records and their replay into
//! trajectories.
//!
//! Every record carries the protocol version, a per-session sequence number
//! and a logical tick. Replaying a log re-runs every logged action through
//! the environment and fails unless the logged states and round rewards are
//! reproduced bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::envs::EnvSpec;
use crate::error::{CoreError, Result};
use crate::types::{ActionVector, AgentTag, Scenario, StateVector, Trajectory};

pub const PROTOCOL: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pretest,
    Demo,
    Practice,
    Evaluation,
    Survey,
    Done,
}

impl Phase {
    /// Phases in which the student controls the environment.
    pub fn is_interactive(self) -> bool {
        matches!(self, Phase::Pretest | Phase::Practice | Phase::Evaluation)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Pretest => "pretest",
            Phase::Demo => "demo",
            Phase::Practice => "practice",
            Phase::Evaluation => "evaluation",
            Phase::Survey => "survey",
            Phase::Done => "done",
        }
    }
}

/// What the client needs to run one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub index: usize,
    pub phase: Phase,
    pub label: String,
    pub scenario: Scenario,
    /// Target states drawn under the student's trace; the playback path of
    /// demo rounds.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overlay: Vec<StateVector>,
    /// Steps available in the round.
    pub time_limit: usize,
}

/// One line of the round plan. Rounds that are not known yet carry the
/// label `pending`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub phase: Phase,
    pub label: String,
}

pub const PENDING: &str = "pending";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Success,
    Timer,
    PenUp,
    Playback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        username: String,
        setting: String,
        seed: u64,
        assets: String,
        env: EnvSpec,
        plan: Vec<PlanEntry>,
    },
    RoundStart {
        round: RoundSpec,
    },
    Step {
        round: usize,
        state: StateVector,
        action: ActionVector,
        next: StateVector,
        reward_display: f64,
        steps_left: usize,
    },
    Rejected {
        round: Option<usize>,
        reason: String,
    },
    PenUp {
        round: usize,
    },
    RoundEnd {
        round: usize,
        reward: f64,
        steps: usize,
        reason: EndReason,
    },
    PlanResolved {
        targets: Vec<usize>,
        plan: Vec<PlanEntry>,
    },
    Survey {
        ratings: Vec<u8>,
        text: String,
    },
    Finalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub protocol: u32,
    pub seq: u64,
    /// Logical clock: one tick per environment step.
    pub tick: u64,
    #[serde(flatten)]
    pub event: Event,
}

impl LogRecord {
    pub fn to_line(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn parse_log(text: &str) -> Result<Vec<LogRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(index, l)| {
            serde_json::from_str(l).map_err(|e| CoreError::Record {
                index,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_log(path: &Path) -> Result<Vec<LogRecord>> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    parse_log(&text)
}

/// Reward of the states visited in a round, `s_0 .. s_T`.
pub fn round_reward(env: &EnvSpec, scenario: &Scenario, states: &[StateVector]) -> f64 {
    env.scenario_reward(scenario, states)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayedRound {
    pub spec: RoundSpec,
    /// `None` for demo playback rounds.
    pub trajectory: Option<Trajectory>,
    pub reward: f64,
    pub reason: EndReason,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayedSession {
    pub session_id: String,
    pub username: String,
    pub setting: String,
    pub seed: u64,
    pub env: EnvSpec,
    pub rounds: Vec<ReplayedRound>,
    pub targets: Option<Vec<usize>>,
    pub survey: Option<(Vec<u8>, String)>,
    pub finalized: bool,
}

impl ReplayedSession {
    pub fn rounds_in(&self, phase: Phase) -> impl Iterator<Item = &ReplayedRound> + '_ {
        self.rounds.iter().filter(move |r| r.spec.phase == phase)
    }

    pub fn practiced_steps(&self) -> usize {
        self.rounds_in(Phase::Practice)
            .filter_map(|r| r.trajectory.as_ref())
            .map(|t| t.len())
            .sum()
    }
}

struct Open {
    spec: RoundSpec,
    steps: Vec<(StateVector, ActionVector)>,
    state: StateVector,
}

fn bad(index: usize, message: impl Into<String>) -> CoreError {
    CoreError::Record {
        index,
        message: message.into(),
    }
}

fn same_bits(a: &StateVector, b: &StateVector) -> bool {
    a.len() == b.len() && a.0.iter().zip(&b.0).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Rebuilds every completed round of a session log. Each logged step must
/// continue from the previous state and match the environment transition
/// exactly; each round reward must equal the reward recomputed from the
/// replayed states.
pub fn replay_log(records: &[LogRecord]) -> Result<ReplayedSession> {
    let Some(first) = records.first() else {
        return Err(CoreError::Empty("session log".into()));
    };
    let Event::SessionCreated {
        session_id,
        username,
        setting,
        seed,
        env,
        ..
    } = &first.event
    else {
        return Err(bad(0, "log must start with session_created"));
    };
    let mut out = ReplayedSession {
        session_id: session_id.clone(),
        username: username.clone(),
        setting: setting.clone(),
        seed: *seed,
        env: env.clone(),
        rounds: Vec::new(),
        targets: None,
        survey: None,
        finalized: false,
    };
    let env = env.clone();
    let mut open: Option<Open> = None;
    let mut last_tick = 0;
    for (i, rec) in records.iter().enumerate() {
        if rec.protocol != PROTOCOL {
            return Err(bad(i, format!("protocol {} is not {PROTOCOL}", rec.protocol)));
        }
        if rec.seq != i as u64 {
            return Err(bad(i, format!("sequence number {} out of order", rec.seq)));
        }
        if rec.tick < last_tick {
            return Err(bad(i, "tick went backwards"));
        }
        last_tick = rec.tick;
        if out.finalized {
            return Err(bad(i, "record after finalized"));
        }
        match &rec.event {
            Event::SessionCreated { .. } if i > 0 => return Err(bad(i, "second session_created")),
            Event::SessionCreated { .. } => {}
            Event::RoundStart { round } => {
                if open.is_some() {
                    return Err(bad(i, "round started before the previous one ended"));
                }
                if round.index != out.rounds.len() {
                    return Err(bad(i, format!("round index {} out of order", round.index)));
                }
                env.check_schema(round.scenario.schema)?;
                open = Some(Open {
                    state: round.scenario.initial_state.clone(),
                    spec: round.clone(),
                    steps: Vec::new(),
                });
            }
            Event::Step {
                round,
                state,
                action,
                next,
                steps_left,
                ..
            } => {
                let o = open.as_mut().ok_or_else(|| bad(i, "step outside a round"))?;
                if *round != o.spec.index || !o.spec.phase.is_interactive() {
                    return Err(bad(i, format!("step does not belong to round {}", o.spec.index)));
                }
                if !same_bits(state, &o.state) {
                    return Err(bad(i, "step does not continue from the previous state"));
                }
                let replayed = env.step(state, action);
                if !same_bits(&replayed, next) {
                    return Err(bad(i, "logged next state differs from the replayed transition"));
                }
                o.steps.push((state.clone(), *action));
                if o.steps.len() > o.spec.time_limit || *steps_left != o.spec.time_limit - o.steps.len() {
                    return Err(bad(i, "timer out of step with the round"));
                }
                o.state = replayed;
            }
            Event::Rejected { .. } | Event::PenUp { .. } => {}
            Event::RoundEnd { round, reward, steps, reason } => {
                let o = open.take().ok_or_else(|| bad(i, "round_end outside a round"))?;
                if *round != o.spec.index {
                    return Err(bad(i, "round_end for another round"));
                }
                let (trajectory, recomputed) = if o.spec.phase.is_interactive() {
                    if *steps != o.steps.len() {
                        return Err(bad(i, "step count differs from the logged steps"));
                    }
                    let mut states: Vec<StateVector> = o.steps.iter().map(|(s, _)| s.clone()).collect();
                    states.push(o.state.clone());
                    let r = round_reward(&env, &o.spec.scenario, &states);
                    let t = Trajectory {
                        id: format!("{}/round-{:02}", out.session_id, o.spec.index),
                        scenario: o.spec.scenario.clone(),
                        agent_tag: AgentTag::Student,
                        steps: o.steps,
                        terminal: Some(o.state),
                        reward: r,
                    };
                    (Some(t), r)
                } else {
                    (None, *reward)
                };
                if recomputed.to_bits() != reward.to_bits() {
                    return Err(bad(i, format!("logged reward {reward} differs from replayed {recomputed}")));
                }
                out.rounds.push(ReplayedRound {
                    spec: o.spec,
                    trajectory,
                    reward: *reward,
                    reason: *reason,
                });
            }
            Event::PlanResolved { targets, .. } => out.targets = Some(targets.clone()),
            Event::Survey { ratings, text } => out.survey = Some((ratings.clone(), text.clone())),
            Event::Finalized => out.finalized = true,
        }
    }
    Ok(out)
}
