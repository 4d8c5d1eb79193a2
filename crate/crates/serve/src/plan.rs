//! Deterministic round plans per setting.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom as _;
use rand::Rng as _;
use teachkit_core::curriculum::drills::{drill_ngrams, drills_for_targets};
use teachkit_core::curriculum::{expertise_from_labels, ngram_frequencies, Drill, ExpertiseVector, Setting};
use teachkit_core::envs::writing::states_to_points;
use teachkit_core::envs::EnvSpec;
use teachkit_core::extract::{time_heuristic_extract, SegmentRef, SkillExtractor};
use teachkit_core::rng;
use teachkit_core::session::{Phase, PlanEntry, RoundSpec, PENDING};
use teachkit_core::{RewardSpec, Scenario, StateVector, Trajectory};

use crate::assets::Assets;
use crate::error::{Result, ServeError};

/// A practice target: the states to imitate from a given start.
#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub label: String,
    pub states: Vec<StateVector>,
    pub scenario: Scenario,
}

/// Rounds of a session in order. `practice` is `None` until individualized
/// drills are resolved from the pretest.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub pretest: Vec<RoundSpec>,
    pub practice: Option<Vec<RoundSpec>>,
    pub evaluation: Vec<RoundSpec>,
}

impl Plan {
    pub fn entries(&self) -> Vec<PlanEntry> {
        let entry = |r: &RoundSpec| PlanEntry {
            phase: r.phase,
            label: r.label.clone(),
        };
        let mut out: Vec<PlanEntry> = self.pretest.iter().map(entry).collect();
        match &self.practice {
            Some(p) => out.extend(p.iter().map(entry)),
            None => out.push(PlanEntry {
                phase: Phase::Practice,
                label: PENDING.into(),
            }),
        }
        out.extend(self.evaluation.iter().map(entry));
        out
    }

    /// Steps allotted to practice rounds.
    pub fn practice_steps(&self) -> Option<usize> {
        self.practice.as_ref().map(|p| {
            p.iter()
                .filter(|r| r.phase == Phase::Practice)
                .map(|r| r.time_limit)
                .sum()
        })
    }

    pub fn rounds(&self) -> Option<Vec<RoundSpec>> {
        let practice = self.practice.as_ref()?;
        let mut out: Vec<RoundSpec> = self.pretest.iter().chain(practice).chain(&self.evaluation).cloned().collect();
        for (i, r) in out.iter_mut().enumerate() {
            r.index = i;
        }
        Some(out)
    }
}

fn round(phase: Phase, label: &str, scenario: &Scenario, overlay: Vec<StateVector>, time_limit: usize) -> RoundSpec {
    RoundSpec {
        index: 0,
        phase,
        label: label.to_string(),
        scenario: Scenario {
            horizon: time_limit,
            ..scenario.clone()
        },
        overlay,
        time_limit,
    }
}

/// A scenario whose reward measures how well `states` are reproduced from
/// their first state.
pub fn item_scenario(env: &EnvSpec, id: &str, states: &[StateVector], template: &Scenario) -> Scenario {
    let reward_spec = match (env, &template.reward_spec) {
        (EnvSpec::Writing(_), RewardSpec::GlyphSequence { glyphs, .. }) => RewardSpec::GlyphSequence {
            glyphs: glyphs.clone(),
            gold: states_to_points(states),
        },
        _ => RewardSpec::GoalPose {
            goal: states.last().cloned().unwrap_or_else(|| template.initial_state.clone()),
        },
    };
    Scenario {
        id: id.to_string(),
        schema: template.schema,
        initial_state: states[0].clone(),
        reward_spec,
        horizon: states.len().saturating_sub(1),
    }
}

fn segment_item(env: &EnvSpec, d: &Trajectory, r: &SegmentRef, label: String) -> Item {
    let states = d.states()[r.start..=r.end].to_vec();
    let scenario = item_scenario(env, &label, &states, &d.scenario);
    Item { label, states, scenario }
}

fn drill_item(env: &EnvSpec, d: &Drill) -> Item {
    let label = d.scenario.id.clone();
    Item {
        scenario: item_scenario(env, &label, &d.states, &d.scenario),
        states: d.states.clone(),
        label,
    }
}

/// Demo rounds for every distinct item followed by practice rounds.
fn with_demos(items: &[Item], practice: Vec<RoundSpec>) -> Vec<RoundSpec> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for it in items {
        if seen.insert(it.label.clone()) {
            out.push(round(
                Phase::Demo,
                &it.label,
                &it.scenario,
                it.states.clone(),
                it.states.len() - 1,
            ));
        }
    }
    out.extend(practice);
    out
}

/// Cycles through `items` with their own lengths until `budget` steps are
/// allotted; the last round is cut short.
fn cycle(items: &[Item], budget: usize) -> Vec<RoundSpec> {
    let mut out = Vec::new();
    let mut left = budget;
    for it in items.iter().cycle() {
        if left == 0 {
            break;
        }
        let t = (it.states.len() - 1).min(left);
        out.push(round(Phase::Practice, &it.label, &it.scenario, it.states.clone(), t));
        left -= t;
    }
    out
}

/// `sessions` rounds per item, item by item, each with an equal share of the
/// budget.
fn repeat(items: &[Item], sessions: usize, budget: usize) -> Vec<RoundSpec> {
    let t = budget / (items.len() * sessions);
    items
        .iter()
        .flat_map(|it| (0..sessions).map(move |_| round(Phase::Practice, &it.label, &it.scenario, it.states.clone(), t)))
        .collect()
}

fn most_common(assets: &Assets, k: usize) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for id in &assets.pool {
        for &m in &assets.labels[id] {
            if !assets.extractor.library.segments[m].is_empty() {
                *counts.entry(m).or_default() += 1;
            }
        }
    }
    let mut v: Vec<(usize, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().take(k).map(|(m, _)| m).collect()
}

/// Skills that some drill n-gram can target.
pub fn drillable(assets: &Assets) -> Result<Vec<usize>> {
    let table = ngram_frequencies(assets.labels.values(), assets.config.drill.n)?;
    let lib = &assets.extractor.library;
    Ok(lib
        .used_skills()
        .into_iter()
        .filter(|&m| !drill_ngrams(&table, lib, m, 1).is_empty())
        .collect())
}

fn drill_rounds(assets: &Assets, targets: &[usize], seed: u64) -> Result<Vec<RoundSpec>> {
    let drills = drills_for_targets(
        targets,
        &assets.config.drill,
        &assets.demos,
        &assets.labels,
        &assets.extractor.library,
        &assets.env,
        seed,
    )?;
    let items: Vec<Item> = targets
        .iter()
        .filter_map(|m| drills.get(m))
        .flatten()
        .map(|d| drill_item(&assets.env, d))
        .collect();
    if items.is_empty() {
        return Err(ServeError::Config("no drills for the targeted skills".into()));
    }
    Ok(with_demos(&items, cycle(&items, assets.config.budget)))
}

pub fn build_plan(assets: &Assets, setting: Setting, seed: u64) -> Result<Plan> {
    let cfg = &assets.config;
    let env = &assets.env;
    let mut r = rng::derive(seed, "session-plan");

    let mut pool = assets.pool.clone();
    pool.shuffle(&mut r);
    let pretest = pool[..cfg.pretest]
        .iter()
        .map(|id| {
            let sc = &assets.demo_for(id).expect("pool scenarios have demos").scenario;
            round(Phase::Pretest, id, sc, Vec::new(), sc.horizon)
        })
        .collect();
    let evaluation = env
        .sample_scenarios(cfg.evaluation, rng::derive(seed, "evaluation").gen())?
        .into_iter()
        .enumerate()
        .map(|(i, sc)| {
            let sc = Scenario {
                id: format!("eval-{i}"),
                ..sc
            };
            round(Phase::Evaluation, &sc.id.clone(), &sc, Vec::new(), sc.horizon)
        })
        .collect();

    let lib = &assets.extractor.library;
    let practice = match setting {
        Setting::FullTrajectory => {
            let items: Vec<Item> = pool
                .iter()
                .map(|id| {
                    let d = assets.demo_for(id).expect("pool scenarios have demos");
                    Item {
                        label: id.clone(),
                        states: d.states(),
                        scenario: d.scenario.clone(),
                    }
                })
                .collect();
            Some(with_demos(&items, cycle(&items, cfg.budget)))
        }
        Setting::Skills => {
            let items: Vec<Item> = most_common(assets, cfg.targets)
                .into_iter()
                .map(|m| {
                    let segs = &lib.segments[m];
                    let s = &segs[r.gen_range(0..segs.len())];
                    segment_item(env, &assets.demos_by_id[&s.trajectory_id], s, format!("skill-{m:02}"))
                })
                .collect();
            Some(with_demos(&items, repeat(&items, cfg.sessions_per_skill, cfg.budget)))
        }
        Setting::TimeHeuristic => {
            let mut items = Vec::new();
            for m in 0..cfg.targets.min(cfg.time_heuristic_k) {
                let d = assets.demo_for(&pool[r.gen_range(0..pool.len())]).expect("pool scenarios have demos");
                let seg = time_heuristic_extract(d, cfg.time_heuristic_k)?;
                let (_, start, end) = seg.segments().nth(m).expect("k segments");
                let s = SegmentRef {
                    trajectory_id: d.id.clone(),
                    start,
                    end,
                };
                items.push(segment_item(env, d, &s, format!("time-{m}")));
            }
            Some(with_demos(&items, repeat(&items, cfg.sessions_per_skill, cfg.budget)))
        }
        Setting::Drills => {
            let available = drillable(assets)?;
            let mut targets: Vec<usize> = available
                .choose_multiple(&mut r, cfg.targets.min(available.len()))
                .copied()
                .collect();
            targets.sort_unstable();
            Some(drill_rounds(assets, &targets, seed)?)
        }
        Setting::IndDrills => None,
    };
    Ok(Plan {
        pretest,
        practice,
        evaluation,
    })
}

/// Expertise from pretest attempts, restricted to skills that drills can
/// target. Attempts without steps count as missing every expert skill.
pub fn pretest_expertise(assets: &Assets, attempts: &BTreeMap<String, Trajectory>) -> Result<ExpertiseVector> {
    let scenarios: Vec<String> = attempts.keys().cloned().collect();
    let mut student = BTreeMap::new();
    let mut rewards = BTreeMap::new();
    for (id, t) in attempts {
        let skills = if t.is_empty() {
            Vec::new()
        } else {
            assets.extractor.extract(t)?.skills
        };
        student.insert(id.clone(), skills);
        rewards.insert(id.clone(), t.reward);
    }
    let mut e = expertise_from_labels(
        &scenarios,
        &assets.labels,
        &student,
        &rewards,
        assets.extractor.latent_dim(),
    )?;
    let ok: BTreeSet<usize> = drillable(assets)?.into_iter().collect();
    e.scores.retain(|m, _| ok.contains(m));
    Ok(e)
}

/// Resolves individualized drills: the lowest-expertise skills after the
/// pretest, two drills each.
pub fn resolve_ind_drills(
    assets: &Assets,
    attempts: &BTreeMap<String, Trajectory>,
    seed: u64,
) -> Result<(Vec<usize>, Vec<RoundSpec>)> {
    let e = pretest_expertise(assets, attempts)?;
    let targets = e.lowest(assets.config.targets);
    let rounds = drill_rounds(assets, &targets, seed)?;
    Ok((targets, rounds))
}
