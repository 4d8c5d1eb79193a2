//! Session state machine and the registry of live sessions.
//!
//! Every state change is appended to the session's JSONL log before it is
//! reported. Restarting the engine rebuilds unfinished sessions by feeding
//! the logged inputs back through the same code path; each regenerated
//! record must equal the logged one.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};
use teachkit_core::curriculum::Setting;
use teachkit_core::envs::writing::{mask_reward, Mask, WritingParams};
use teachkit_core::envs::{parking, EnvSpec};
use teachkit_core::infill::infill_points;
use teachkit_core::session::{
    parse_log, round_reward, EndReason, Event, LogRecord, Phase, PlanEntry, RoundSpec, PROTOCOL,
};
use teachkit_core::{ActionVector, AgentTag, RewardSpec, StateVector, Trajectory};

use crate::assets::Assets;
use crate::error::{Result, ServeError};
use crate::plan::{build_plan, resolve_ind_drills};
use crate::protocol::ServerMsg;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRequest {
    pub username: String,
    pub env: String,
    pub setting: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub protocol: u32,
    pub session_id: String,
    pub plan: Vec<PlanEntry>,
    pub round: RoundSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub protocol: u32,
    pub session_id: String,
    pub username: String,
    pub env: String,
    pub setting: String,
    pub phase: Phase,
    pub round: Option<usize>,
    pub steps_left: Option<usize>,
    pub state: Option<Vec<f64>>,
    pub rounds_completed: usize,
    pub finalized: bool,
}

struct Logger {
    path: PathBuf,
    file: Option<File>,
    /// Records still to be matched while recovering.
    expected: VecDeque<LogRecord>,
    seq: u64,
    tick: u64,
}

impl Logger {
    fn new(path: PathBuf, expected: Vec<LogRecord>) -> Self {
        Logger {
            path,
            file: None,
            expected: expected.into(),
            seq: 0,
            tick: 0,
        }
    }

    fn push(&mut self, event: Event) -> Result<()> {
        let rec = LogRecord {
            protocol: PROTOCOL,
            seq: self.seq,
            tick: self.tick,
            event,
        };
        self.seq += 1;
        if let Some(want) = self.expected.pop_front() {
            if want != rec {
                return Err(ServeError::Recovery {
                    path: self.path.display().to_string(),
                    message: format!("record {} diverges from the log", rec.seq),
                });
            }
            return Ok(());
        }
        if self.file.is_none() {
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| ServeError::io(&self.path, e))?;
            self.file = Some(f);
        }
        let f = self.file.as_mut().expect("opened above");
        f.write_all(rec.to_line()?.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| ServeError::io(&self.path, e))
    }
}

/// Per-step display reward, kept incrementally for writing rounds.
enum Scorer {
    Parking {
        goal: StateVector,
        params: parking::ParkingParams,
    },
    Writing {
        gold: Mask,
        mask: Mask,
        last: [f64; 2],
        params: WritingParams,
    },
}

impl Scorer {
    fn new(env: &EnvSpec, spec: &RoundSpec) -> Self {
        let s0 = &spec.scenario.initial_state;
        match (env, &spec.scenario.reward_spec) {
            (EnvSpec::Writing(p), RewardSpec::GlyphSequence { gold, .. }) => {
                let (w, h) = (p.width() as usize, p.height() as usize);
                let last = [s0[0], s0[1]];
                let mut mask = Mask::new(w, h);
                mask.stamp(last, p.brush_radius);
                Scorer::Writing {
                    gold: Mask::rasterize(&infill_points(gold, p.infill_threshold), p.brush_radius, w, h),
                    mask,
                    last,
                    params: p.clone(),
                }
            }
            (EnvSpec::Parking(p), RewardSpec::GoalPose { goal }) => Scorer::Parking {
                goal: goal.clone(),
                params: p.clone(),
            },
            _ => unreachable!("scenario schema is checked when the plan is built"),
        }
    }

    fn current(&self, s: &StateVector) -> f64 {
        match self {
            Scorer::Parking { goal, params } => parking::reward(s, goal, params),
            Scorer::Writing { gold, mask, .. } => mask_reward(mask, gold),
        }
    }

    fn advance(&mut self, next: &StateVector) -> f64 {
        if let Scorer::Writing { mask, last, params, .. } = self {
            let p = [next[0], next[1]];
            for q in infill_points(&[*last, p], params.infill_threshold).into_iter().skip(1) {
                mask.stamp(q, params.brush_radius);
            }
            *last = p;
        }
        self.current(next)
    }
}

struct Live {
    spec: RoundSpec,
    states: Vec<StateVector>,
    actions: Vec<ActionVector>,
    steps_left: usize,
    scorer: Scorer,
}

pub struct Session {
    pub id: String,
    pub username: String,
    pub setting: Setting,
    pub seed: u64,
    assets: Arc<Assets>,
    queue: VecDeque<RoundSpec>,
    pending: bool,
    next_index: usize,
    phase: Phase,
    live: Option<Live>,
    pretest: BTreeMap<String, Trajectory>,
    survey: Option<(Vec<u8>, String)>,
    finalized: bool,
    log: Logger,
}

fn valid_username(u: &str) -> bool {
    (1..=64).contains(&u.len()) && u.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Session {
    fn create(
        assets: Arc<Assets>,
        req: &SessionRequest,
        id: String,
        log: Logger,
    ) -> Result<(Self, Vec<ServerMsg>, Vec<PlanEntry>)> {
        let setting = Setting::parse(&req.setting).ok_or_else(|| ServeError::UnknownSetting(req.setting.clone()))?;
        let plan = build_plan(&assets, setting, req.seed)?;
        let entries = plan.entries();
        let mut queue: VecDeque<RoundSpec> = plan.pretest.into();
        let pending = plan.practice.is_none();
        queue.extend(plan.practice.unwrap_or_default());
        queue.extend(plan.evaluation);
        let mut s = Session {
            id,
            username: req.username.clone(),
            setting,
            seed: req.seed,
            assets,
            queue,
            pending,
            next_index: 0,
            phase: Phase::Pretest,
            live: None,
            pretest: BTreeMap::new(),
            survey: None,
            finalized: false,
            log,
        };
        s.log.push(Event::SessionCreated {
            session_id: s.id.clone(),
            username: s.username.clone(),
            setting: setting.as_str().into(),
            seed: s.seed,
            assets: s.assets.id.clone(),
            env: s.assets.env.clone(),
            plan: entries.clone(),
        })?;
        let mut msgs = Vec::new();
        s.start_next(&mut msgs)?;
        Ok((s, msgs, entries))
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn log_path(&self) -> &Path {
        &self.log.path
    }

    fn env(&self) -> &EnvSpec {
        &self.assets.env
    }

    fn set_phase(&mut self, phase: Phase, msgs: &mut Vec<ServerMsg>) {
        if phase != self.phase {
            self.phase = phase;
            msgs.push(ServerMsg::Phase {
                protocol: PROTOCOL,
                phase,
            });
        }
    }

    /// Starts the next round, playing back demo rounds on the way.
    fn start_next(&mut self, msgs: &mut Vec<ServerMsg>) -> Result<()> {
        loop {
            let Some(mut spec) = self.queue.pop_front() else {
                self.set_phase(Phase::Survey, msgs);
                return Ok(());
            };
            spec.index = self.next_index;
            self.next_index += 1;
            self.set_phase(spec.phase, msgs);
            self.log.push(Event::RoundStart { round: spec.clone() })?;
            msgs.push(ServerMsg::Round {
                protocol: PROTOCOL,
                spec: spec.clone(),
            });
            if spec.phase == Phase::Demo {
                let n = spec.overlay.len();
                for (i, s) in spec.overlay.iter().enumerate().skip(1) {
                    self.log.tick += 1;
                    msgs.push(ServerMsg::State {
                        protocol: PROTOCOL,
                        round: spec.index,
                        state: s.0.clone(),
                        reward_display: 0.0,
                        steps_left: n - 1 - i,
                        playback: true,
                        terminal: i == n - 1,
                    });
                }
                let reward = round_reward(self.env(), &spec.scenario, &spec.overlay);
                self.log.push(Event::RoundEnd {
                    round: spec.index,
                    reward,
                    steps: n.saturating_sub(1),
                    reason: EndReason::Playback,
                })?;
                continue;
            }
            let scorer = Scorer::new(self.env(), &spec);
            let s0 = spec.scenario.initial_state.clone();
            msgs.push(ServerMsg::State {
                protocol: PROTOCOL,
                round: spec.index,
                state: s0.0.clone(),
                reward_display: scorer.current(&s0),
                steps_left: spec.time_limit,
                playback: false,
                terminal: false,
            });
            self.live = Some(Live {
                steps_left: spec.time_limit,
                spec,
                states: vec![s0],
                actions: Vec::new(),
                scorer,
            });
            return Ok(());
        }
    }

    fn live_check(&self) -> Result<()> {
        if self.finalized {
            return Err(ServeError::AlreadyFinalized(self.id.clone()));
        }
        if self.live.is_none() {
            return Err(ServeError::WrongPhase {
                expected: "an interactive round",
                found: self.phase.as_str(),
            });
        }
        Ok(())
    }

    /// Logs a malformed input; the state is unchanged.
    pub fn reject(&mut self, reason: &str, msgs: &mut Vec<ServerMsg>) -> Result<()> {
        if self.finalized {
            return Err(ServeError::AlreadyFinalized(self.id.clone()));
        }
        self.log.push(Event::Rejected {
            round: self.live.as_ref().map(|l| l.spec.index),
            reason: reason.to_string(),
        })?;
        msgs.push(ServerMsg::Rejected {
            protocol: PROTOCOL,
            reason: reason.to_string(),
        });
        Ok(())
    }

    pub fn action(&mut self, values: &[f64], msgs: &mut Vec<ServerMsg>) -> Result<()> {
        self.live_check()?;
        if values.len() != 2 || values.iter().any(|v| !v.is_finite()) {
            return self.reject(&format!("action needs 2 finite values, got {values:?}"), msgs);
        }
        let mut a = ActionVector([values[0], values[1]]);
        if let EnvSpec::Parking(_) = self.env() {
            a = a.clamped_unit();
        }
        let env = self.assets.env.clone();
        let live = self.live.as_mut().expect("checked");
        let s = live.states.last().expect("initial state").clone();
        let next = env.step(&s, &a);
        live.steps_left -= 1;
        let reward_display = live.scorer.advance(&next);
        let (round, steps_left) = (live.spec.index, live.steps_left);
        live.states.push(next.clone());
        live.actions.push(a);
        let success = env.is_success(&live.spec.scenario, &next);
        self.log.tick += 1;
        self.log.push(Event::Step {
            round,
            state: s,
            action: a,
            next: next.clone(),
            reward_display,
            steps_left,
        })?;
        msgs.push(ServerMsg::State {
            protocol: PROTOCOL,
            round,
            state: next.0,
            reward_display,
            steps_left,
            playback: false,
            terminal: success || steps_left == 0,
        });
        if success {
            self.end_round(EndReason::Success, msgs)
        } else if steps_left == 0 {
            self.end_round(EndReason::Timer, msgs)
        } else {
            Ok(())
        }
    }

    pub fn pen_up(&mut self, msgs: &mut Vec<ServerMsg>) -> Result<()> {
        self.live_check()?;
        if let EnvSpec::Parking(_) = self.env() {
            return self.reject("pen_up only applies to writing rounds", msgs);
        }
        let round = self.live.as_ref().expect("checked").spec.index;
        self.log.push(Event::PenUp { round })?;
        self.end_round(EndReason::PenUp, msgs)
    }

    fn end_round(&mut self, reason: EndReason, msgs: &mut Vec<ServerMsg>) -> Result<()> {
        let live = self.live.take().expect("round in progress");
        let reward = round_reward(self.env(), &live.spec.scenario, &live.states);
        self.log.push(Event::RoundEnd {
            round: live.spec.index,
            reward,
            steps: live.actions.len(),
            reason,
        })?;
        msgs.push(ServerMsg::Score {
            protocol: PROTOCOL,
            round: live.spec.index,
            value: reward,
        });
        if live.spec.phase == Phase::Pretest {
            let terminal = live.states.last().cloned();
            let steps = live.states.into_iter().zip(live.actions).collect();
            self.pretest.insert(
                live.spec.scenario.id.clone(),
                Trajectory {
                    id: format!("{}/{}", self.id, live.spec.scenario.id),
                    scenario: live.spec.scenario,
                    agent_tag: AgentTag::Student,
                    steps,
                    terminal,
                    reward,
                },
            );
            let more_pretest = self.queue.front().is_some_and(|r| r.phase == Phase::Pretest);
            if self.pending && !more_pretest {
                self.resolve()?;
            }
        }
        self.start_next(msgs)
    }

    fn resolve(&mut self) -> Result<()> {
        let (targets, rounds) = resolve_ind_drills(&self.assets, &self.pretest, self.seed)?;
        for r in rounds.into_iter().rev() {
            self.queue.push_front(r);
        }
        self.pending = false;
        let plan = self
            .queue
            .iter()
            .map(|r| PlanEntry {
                phase: r.phase,
                label: r.label.clone(),
            })
            .collect();
        self.log.push(Event::PlanResolved { targets, plan })
    }

    pub fn submit_survey(&mut self, ratings: &[u8], text: &str) -> Result<()> {
        if self.finalized {
            return Err(ServeError::AlreadyFinalized(self.id.clone()));
        }
        if self.phase != Phase::Survey || self.survey.is_some() {
            return Err(ServeError::WrongPhase {
                expected: "survey",
                found: if self.survey.is_some() { "survey (already submitted)" } else { self.phase.as_str() },
            });
        }
        if ratings.is_empty() {
            return Err(ServeError::Config("survey needs at least one rating".into()));
        }
        if let Some(&r) = ratings.iter().find(|r| !(1..=7).contains(*r)) {
            return Err(ServeError::Rating(r));
        }
        self.log.push(Event::Survey {
            ratings: ratings.to_vec(),
            text: text.to_string(),
        })?;
        self.survey = Some((ratings.to_vec(), text.to_string()));
        Ok(())
    }

    pub fn finalize(&mut self) -> Result<PathBuf> {
        if self.finalized {
            return Err(ServeError::AlreadyFinalized(self.id.clone()));
        }
        if self.phase != Phase::Survey {
            return Err(ServeError::WrongPhase {
                expected: "survey",
                found: self.phase.as_str(),
            });
        }
        self.log.push(Event::Finalized)?;
        if let Some(f) = self.log.file.take() {
            f.sync_all().map_err(|e| ServeError::io(&self.log.path, e))?;
        }
        self.finalized = true;
        self.phase = Phase::Done;
        Ok(self.log.path.clone())
    }

    /// Messages that bring a (re)connecting client up to date.
    pub fn resume_messages(&self) -> Vec<ServerMsg> {
        let mut out = vec![ServerMsg::Phase {
            protocol: PROTOCOL,
            phase: self.phase,
        }];
        if let Some(l) = &self.live {
            let s = l.states.last().expect("initial state");
            out.push(ServerMsg::Round {
                protocol: PROTOCOL,
                spec: l.spec.clone(),
            });
            out.push(ServerMsg::State {
                protocol: PROTOCOL,
                round: l.spec.index,
                state: s.0.clone(),
                reward_display: l.scorer.current(s),
                steps_left: l.steps_left,
                playback: false,
                terminal: false,
            });
        }
        out
    }

    pub fn status(&self) -> Status {
        let live = self.live.as_ref();
        Status {
            protocol: PROTOCOL,
            session_id: self.id.clone(),
            username: self.username.clone(),
            env: self.env().name().into(),
            setting: self.setting.as_str().into(),
            phase: self.phase,
            round: live.map(|l| l.spec.index),
            steps_left: live.map(|l| l.steps_left),
            state: live.map(|l| l.states.last().expect("initial state").0.clone()),
            rounds_completed: self.next_index - usize::from(live.is_some()),
            finalized: self.finalized,
        }
    }
}

pub type SessionHandle = Arc<Mutex<Session>>;

#[derive(Default)]
struct Registry {
    sessions: BTreeMap<String, SessionHandle>,
    active: BTreeSet<String>,
}

/// All sessions of one service instance. Each session sits behind its own
/// lock, so its log is written by one caller at a time.
pub struct Engine {
    root: PathBuf,
    assets: BTreeMap<String, Arc<Assets>>,
    registry: Mutex<Registry>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Engine {
    /// Opens the session store under `root`, resuming every logged session.
    pub fn open(root: impl Into<PathBuf>, assets: Vec<Assets>) -> Result<Self> {
        let root = root.into();
        let dir = root.join("sessions");
        fs::create_dir_all(&dir).map_err(|e| ServeError::io(&dir, e))?;
        let engine = Engine {
            root,
            assets: assets.into_iter().map(|a| (a.env.name().to_string(), Arc::new(a))).collect(),
            registry: Mutex::new(Registry::default()),
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| ServeError::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for p in paths {
            engine.recover(&p)?;
        }
        Ok(engine)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.jsonl"))
    }

    fn recover(&self, path: &Path) -> Result<()> {
        let mut text = fs::read_to_string(path).map_err(|e| ServeError::io(path, e))?;
        if !text.is_empty() && !text.ends_with('\n') {
            // A torn final line from a crash mid-append.
            let keep = text.rfind('\n').map_or(0, |i| i + 1);
            text.truncate(keep);
            fs::write(path, &text).map_err(|e| ServeError::io(path, e))?;
        }
        let records = parse_log(&text)?;
        let recovery = |message: String| ServeError::Recovery {
            path: path.display().to_string(),
            message,
        };
        let Some(LogRecord {
            event:
                Event::SessionCreated {
                    session_id,
                    username,
                    setting,
                    seed,
                    assets,
                    env,
                    ..
                },
            ..
        }) = records.first().cloned()
        else {
            return Err(recovery("log does not start with session_created".into()));
        };
        let a = self
            .assets
            .get(env.name())
            .filter(|a| a.id == assets && a.env == env)
            .ok_or_else(|| recovery(format!("assets `{assets}` are not loaded")))?
            .clone();
        let req = SessionRequest {
            username: username.clone(),
            env: env.name().into(),
            setting,
            seed,
        };
        let logger = Logger::new(path.to_path_buf(), records.clone());
        let (mut s, _, _) = Session::create(a, &req, session_id.clone(), logger)?;
        let mut sink = Vec::new();
        for rec in &records {
            match &rec.event {
                Event::Step { action, .. } => s.action(&action.0, &mut sink)?,
                Event::PenUp { .. } => s.pen_up(&mut sink)?,
                Event::Rejected { reason, .. } => s.reject(reason, &mut sink)?,
                Event::Survey { ratings, text } => s.submit_survey(ratings, text)?,
                Event::Finalized => {
                    s.finalize()?;
                }
                _ => {}
            }
            sink.clear();
        }
        if !s.log.expected.is_empty() {
            return Err(recovery(format!("{} logged records were not reproduced", s.log.expected.len())));
        }
        log::info!("resumed session `{session_id}` in phase {}", s.phase.as_str());
        let mut reg = lock(&self.registry);
        if !s.finalized {
            reg.active.insert(username);
        }
        reg.sessions.insert(session_id, Arc::new(Mutex::new(s)));
        Ok(())
    }

    pub fn create_session(&self, req: &SessionRequest) -> Result<Created> {
        if !valid_username(&req.username) {
            return Err(ServeError::InvalidUsername(req.username.clone()));
        }
        let setting = Setting::parse(&req.setting).ok_or_else(|| ServeError::UnknownSetting(req.setting.clone()))?;
        let assets = self
            .assets
            .get(&req.env)
            .ok_or_else(|| ServeError::UnknownEnv(req.env.clone()))?
            .clone();
        let id = format!("{}-{}-{}-{}", req.username, req.env, setting.as_str(), req.seed);
        let mut reg = lock(&self.registry);
        if reg.active.contains(&req.username) {
            return Err(ServeError::DuplicateSession(req.username.clone()));
        }
        let path = self.log_path(&id);
        if reg.sessions.contains_key(&id) || path.exists() {
            return Err(ServeError::SessionExists(id));
        }
        let (s, msgs, plan) = Session::create(assets, req, id.clone(), Logger::new(path, Vec::new()))?;
        let round = msgs
            .iter()
            .find_map(|m| match m {
                ServerMsg::Round { spec, .. } => Some(spec.clone()),
                _ => None,
            })
            .expect("a session starts with a pretest round");
        reg.active.insert(req.username.clone());
        reg.sessions.insert(id.clone(), Arc::new(Mutex::new(s)));
        Ok(Created {
            protocol: PROTOCOL,
            session_id: id,
            plan,
            round,
        })
    }

    pub fn session(&self, id: &str) -> Result<SessionHandle> {
        lock(&self.registry)
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ServeError::NoSession(id.to_string()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        lock(&self.registry).sessions.keys().cloned().collect()
    }

    fn with<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T>) -> Result<T> {
        let h = self.session(id)?;
        let mut s = lock(&h);
        f(&mut s)
    }

    pub fn action(&self, id: &str, values: &[f64]) -> Result<Vec<ServerMsg>> {
        self.with(id, |s| {
            let mut msgs = Vec::new();
            s.action(values, &mut msgs)?;
            Ok(msgs)
        })
    }

    pub fn pen_up(&self, id: &str) -> Result<Vec<ServerMsg>> {
        self.with(id, |s| {
            let mut msgs = Vec::new();
            s.pen_up(&mut msgs)?;
            Ok(msgs)
        })
    }

    pub fn reject(&self, id: &str, reason: &str) -> Result<Vec<ServerMsg>> {
        self.with(id, |s| {
            let mut msgs = Vec::new();
            s.reject(reason, &mut msgs)?;
            Ok(msgs)
        })
    }

    pub fn resume(&self, id: &str) -> Result<Vec<ServerMsg>> {
        self.with(id, |s| Ok(s.resume_messages()))
    }

    pub fn status(&self, id: &str) -> Result<Status> {
        self.with(id, |s| Ok(s.status()))
    }

    pub fn submit_survey(&self, id: &str, ratings: &[u8], text: &str) -> Result<()> {
        self.with(id, |s| s.submit_survey(ratings, text))
    }

    pub fn finalize(&self, id: &str) -> Result<PathBuf> {
        let (path, user) = self.with(id, |s| Ok((s.finalize()?, s.username.clone())))?;
        lock(&self.registry).active.remove(&user);
        Ok(path)
    }
}
