#![allow(dead_code)]

use std::sync::OnceLock;

use rand::Rng as _;
use teachkit_core::envs::{EnvSpec, Policy, ScriptedParkingExpert};
use teachkit_core::rng;
use teachkit_core::session::{Phase, RoundSpec};
use teachkit_core::RewardSpec;
use teachkit_serve::engine::Created;
use teachkit_serve::{AssetConfig, Assets, ClientMsg, Engine, ServerMsg};

pub fn parking_assets() -> &'static Assets {
    static A: OnceLock<Assets> = OnceLock::new();
    A.get_or_init(|| {
        let env = EnvSpec::parking();
        let cfg = AssetConfig::for_env(&env, 7);
        Assets::build(env, cfg).unwrap()
    })
}

pub fn writing_assets() -> &'static Assets {
    static A: OnceLock<Assets> = OnceLock::new();
    A.get_or_init(|| {
        let env = EnvSpec::writing();
        let cfg = AssetConfig::for_env(&env, 7);
        Assets::build(env, cfg).unwrap()
    })
}

pub fn engine(root: &std::path::Path) -> Engine {
    Engine::open(root, vec![parking_assets().clone(), writing_assets().clone()]).unwrap()
}

/// A scripted student: the parking expert or a gold-trace follower, with
/// seeded noise on every action.
pub struct Client {
    pub noise: f64,
    pub rng: rng::Rng,
    pub spec: Option<RoundSpec>,
    pub state: Vec<f64>,
    pub step: usize,
    pub phase: Phase,
    pub scores: Vec<(usize, Phase, f64)>,
    pub rounds: Vec<RoundSpec>,
    pub states_seen: usize,
    /// A live round awaits input.
    pub ready: bool,
    pub sent: Vec<ClientMsg>,
    /// Inputs replayed without looking at the server state.
    pub script: Option<std::collections::VecDeque<ClientMsg>>,
}

impl Client {
    pub fn new(noise: f64, seed: u64) -> Self {
        Client {
            noise,
            rng: rng::seeded(seed),
            spec: None,
            state: Vec::new(),
            step: 0,
            phase: Phase::Pretest,
            scores: Vec::new(),
            rounds: Vec::new(),
            states_seen: 0,
            ready: false,
            sent: Vec::new(),
            script: None,
        }
    }

    pub fn observe(&mut self, msgs: &[ServerMsg]) {
        for m in msgs {
            match m {
                ServerMsg::Round { spec, .. } => {
                    // A reconnect repeats the running round.
                    if self.spec.as_ref().map(|s| s.index) != Some(spec.index) {
                        self.rounds.push(spec.clone());
                        self.spec = Some(spec.clone());
                        self.step = 0;
                    }
                }
                ServerMsg::State {
                    state,
                    playback,
                    terminal,
                    ..
                } => {
                    self.states_seen += 1;
                    if !playback {
                        self.state = state.clone();
                        self.ready = !terminal;
                    }
                }
                ServerMsg::Score { round, value, .. } => {
                    let phase = self.rounds.iter().find(|r| r.index == *round).map_or(Phase::Done, |r| r.phase);
                    self.scores.push((*round, phase, *value));
                }
                ServerMsg::Phase { phase, .. } => self.phase = *phase,
                ServerMsg::Rejected { .. } | ServerMsg::Error { .. } => {}
            }
        }
    }

    pub fn done(&self) -> bool {
        matches!(self.phase, Phase::Survey | Phase::Done)
    }

    /// Next input for the current round.
    pub fn next(&mut self, env: &EnvSpec) -> ClientMsg {
        self.ready = false;
        let m = match self.script.as_mut() {
            Some(s) => s.pop_front().expect("script long enough"),
            None => self.policy(env),
        };
        self.sent.push(m.clone());
        m
    }

    fn policy(&mut self, env: &EnvSpec) -> ClientMsg {
        let spec = self.spec.as_ref().expect("a round is running");
        self.step += 1;
        let mut a = match (env, &spec.scenario.reward_spec) {
            (EnvSpec::Parking(p), _) => {
                let expert = ScriptedParkingExpert {
                    params: p.clone(),
                    ..Default::default()
                };
                let s = teachkit_core::StateVector(self.state.clone());
                expert.act(&s, &spec.scenario).0
            }
            (_, RewardSpec::GlyphSequence { gold, .. }) => {
                let k = self.step;
                if k >= gold.len() {
                    return ClientMsg::pen_up();
                }
                [gold[k][0] - self.state[0], gold[k][1] - self.state[1]]
            }
            _ => unreachable!(),
        };
        for v in &mut a {
            *v += self.noise * self.rng.gen_range(-1.0..1.0);
        }
        ClientMsg::action(a.to_vec())
    }

    /// Drives a session to the survey phase through the engine directly.
    pub fn run(&mut self, engine: &Engine, created: &Created, env: &EnvSpec) {
        let mut msgs = engine.resume(&created.session_id).unwrap();
        loop {
            self.observe(&msgs);
            if self.done() {
                return;
            }
            msgs = match self.next(env) {
                ClientMsg::Action { values, .. } => engine.action(&created.session_id, &values).unwrap(),
                ClientMsg::PenUp { .. } => engine.pen_up(&created.session_id).unwrap(),
            };
        }
    }
}
