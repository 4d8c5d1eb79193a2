//! Individualized drills: concatenated expert segments realizing frequent
//! skill n-grams that contain a weak skill.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::curriculum::expertise::ExpertiseVector;
use crate::curriculum::ngram::{ngram_frequencies, NGramTable};
use crate::envs::{replay, EnvSpec};
use crate::error::{CoreError, Result};
use crate::extract::{SegmentRef, SkillLibrary};
use crate::rng;
use crate::types::{ActionVector, AgentTag, Scenario, StateVector, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrillConfig {
    /// n-gram length.
    pub n: usize,
    /// Repetitions of the concatenated segments.
    pub n_rep: usize,
    /// Number of target skills.
    pub n_target: usize,
    /// Drills per target skill.
    pub n_drills: usize,
}

impl DrillConfig {
    pub fn parking() -> Self {
        DrillConfig {
            n: 3,
            n_rep: 1,
            n_target: 7,
            n_drills: 1,
        }
    }

    pub fn writing() -> Self {
        DrillConfig {
            n: 2,
            n_rep: 3,
            n_target: 8,
            n_drills: 1,
        }
    }

    pub fn for_env(env: &EnvSpec) -> Self {
        match env {
            EnvSpec::Parking(_) => Self::parking(),
            EnvSpec::Writing(_) => Self::writing(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drill {
    pub target_skill: usize,
    pub ngram: Vec<usize>,
    pub repetitions: usize,
    /// Segment chosen for each position of the n-gram.
    pub segments: Vec<SegmentRef>,
    pub actions: Vec<ActionVector>,
    pub initial_state: StateVector,
    /// Rendered states, `actions.len() + 1` of them.
    pub states: Vec<StateVector>,
    pub scenario: Scenario,
}

impl Drill {
    /// The rendered drill as a trajectory.
    pub fn trajectory(&self) -> Trajectory {
        let steps = self
            .states
            .iter()
            .zip(&self.actions)
            .map(|(s, a)| (s.clone(), *a))
            .collect();
        Trajectory {
            id: self.scenario.id.clone(),
            scenario: self.scenario.clone(),
            agent_tag: AgentTag::Synthetic,
            steps,
            terminal: self.states.last().cloned(),
            reward: 0.0,
        }
    }

    /// Expert `(state, action)` pairs behind the drill, in drill order, with
    /// the scenario each pair came from.
    pub fn source_pairs<'a>(
        &self,
        demos: &'a BTreeMap<String, Trajectory>,
    ) -> Vec<(&'a Scenario, &'a StateVector, ActionVector)> {
        let mut out = Vec::with_capacity(self.actions.len());
        for _ in 0..self.repetitions {
            for r in &self.segments {
                let d = &demos[&r.trajectory_id];
                for (s, a) in &d.steps[r.start..r.end] {
                    out.push((&d.scenario, s, *a));
                }
            }
        }
        out
    }
}

/// Builds one drill for `ngram`, drawing one library segment per distinct
/// skill with `rng`.
pub fn build_drill(
    target: usize,
    ngram: &[usize],
    n_rep: usize,
    demos: &BTreeMap<String, Trajectory>,
    library: &SkillLibrary,
    env: &EnvSpec,
    rng: &mut rng::Rng,
    id: &str,
) -> Result<Drill> {
    let mut chosen: BTreeMap<usize, SegmentRef> = BTreeMap::new();
    for &m in ngram {
        if chosen.contains_key(&m) {
            continue;
        }
        let pool = library
            .segments
            .get(m)
            .filter(|p| !p.is_empty())
            .ok_or_else(|| CoreError::InvalidParameter(format!("skill {m} has no segments")))?;
        chosen.insert(m, pool[rng.gen_range(0..pool.len())].clone());
    }
    let segments: Vec<SegmentRef> = ngram.iter().map(|m| chosen[m].clone()).collect();
    let mut actions = Vec::new();
    for _ in 0..n_rep {
        for r in &segments {
            let d = demos
                .get(&r.trajectory_id)
                .ok_or_else(|| CoreError::UnknownTrajectory(r.trajectory_id.clone()))?;
            actions.extend(d.steps[r.start..r.end].iter().map(|(_, a)| *a));
        }
    }
    let first = &demos[&segments[0].trajectory_id];
    let initial_state = first.steps[segments[0].start].0.clone();
    let states = replay(env, &initial_state, &actions);
    let scenario = Scenario {
        id: id.to_string(),
        schema: first.scenario.schema,
        initial_state: initial_state.clone(),
        reward_spec: first.scenario.reward_spec.clone(),
        horizon: actions.len(),
    };
    Ok(Drill {
        target_skill: target,
        ngram: ngram.to_vec(),
        repetitions: n_rep,
        segments,
        actions,
        initial_state,
        states,
        scenario,
    })
}

/// Most frequent n-grams containing `m` whose skills all have library
/// segments.
pub fn drill_ngrams(table: &NGramTable, library: &SkillLibrary, m: usize, k: usize) -> Vec<Vec<usize>> {
    table
        .containing(m)
        .into_iter()
        .filter(|(x, _)| {
            x.iter()
                .all(|&s| library.segments.get(s).is_some_and(|p| !p.is_empty()))
        })
        .take(k)
        .map(|(x, _)| x.clone())
        .collect()
}

/// Drills for the `n_target` lowest-expertise skills. Targets without any
/// usable n-gram are skipped with a warning.
pub fn create_drills(
    expertise: &ExpertiseVector,
    cfg: &DrillConfig,
    demos: &[Trajectory],
    labels: &BTreeMap<String, Vec<usize>>,
    library: &SkillLibrary,
    env: &EnvSpec,
    seed: u64,
) -> Result<BTreeMap<usize, Vec<Drill>>> {
    let targets = expertise.lowest(cfg.n_target);
    drills_for_targets(&targets, cfg, demos, labels, library, env, seed)
}

pub fn drills_for_targets(
    targets: &[usize],
    cfg: &DrillConfig,
    demos: &[Trajectory],
    labels: &BTreeMap<String, Vec<usize>>,
    library: &SkillLibrary,
    env: &EnvSpec,
    seed: u64,
) -> Result<BTreeMap<usize, Vec<Drill>>> {
    if cfg.n_rep == 0 || cfg.n_drills == 0 {
        return Err(CoreError::InvalidParameter("n_rep and n_drills must be >= 1".into()));
    }
    let table = ngram_frequencies(labels.values(), cfg.n)?;
    let by_id: BTreeMap<String, Trajectory> = demos.iter().map(|d| (d.id.clone(), d.clone())).collect();
    let mut out = BTreeMap::new();
    for &m in targets {
        let grams = drill_ngrams(&table, library, m, cfg.n_drills);
        if grams.is_empty() {
            log::warn!("no {}-gram contains skill {m}; skipping it", cfg.n);
            continue;
        }
        let mut drills = Vec::with_capacity(grams.len());
        for (k, x) in grams.iter().enumerate() {
            let mut r = rng::derive(seed, &format!("drill/{m}/{x:?}"));
            let id = format!("drill-{m:02}-{k}");
            drills.push(build_drill(m, x, cfg.n_rep, &by_id, library, env, &mut r, &id)?);
        }
        out.insert(m, drills);
    }
    Ok(out)
}

/// Export shape of a drill.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrillRecord {
    pub target_skill: usize,
    pub ngram: Vec<usize>,
    pub actions: Vec<ActionVector>,
    pub initial_state: StateVector,
    pub states: Vec<StateVector>,
}

impl From<&Drill> for DrillRecord {
    fn from(d: &Drill) -> Self {
        DrillRecord {
            target_skill: d.target_skill,
            ngram: d.ngram.clone(),
            actions: d.actions.clone(),
            initial_state: d.initial_state.clone(),
            states: d.states.clone(),
        }
    }
}
