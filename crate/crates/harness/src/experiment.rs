//! Synthetic-student experiment on the parking task: diverse scenario pool,
//! expertise assessment from student rollouts, practice data per setting at
//! equal size, fine-tuning and evaluation over paired evaluation sets.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use teachkit_core::curriculum::drills::{build_drill, drill_ngrams};
use teachkit_core::curriculum::{
    assess_expertise, ngram_frequencies, select_diverse_scenarios, Drill, DrillConfig, ExpertiseVector,
};
use teachkit_core::envs::{scripted_parking_expert, EnvSpec, ParkingParams};
use teachkit_core::extract::builtin::fit_builtin;
use teachkit_core::extract::time_heuristic::time_heuristic_extract;
use teachkit_core::extract::{label_all, BuiltinExtractor, SegmentRef};
use teachkit_core::{rng, ActionVector, ExtractorConfig, Scenario, StateVector, Trajectory};
use teachkit_student::{
    bc_train, eval_mse, filter_reverse, fine_tune, rollout_many, BcDataset, Mlp, TrainConfig,
};

use crate::error::{HarnessError, Result};
use crate::metrics::{mean, std_dev};
use crate::wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};

pub use teachkit_core::curriculum::Setting;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudentKind {
    /// Full training on data where only a fraction of the reverse pairs is kept.
    Reversing,
    /// Short training on all the data.
    HalfTrained,
}

impl StudentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reversing" => Some(StudentKind::Reversing),
            "half_trained" | "half-trained" | "half" => Some(StudentKind::HalfTrained),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub student: StudentKind,
    pub parking: ParkingParams,
    pub seeds: Vec<u64>,
    pub settings: Vec<Setting>,
    pub n_demos: usize,
    pub pool_size: usize,
    pub pretest: usize,
    pub eval_per_set: usize,
    pub eval_sets: usize,
    /// Skills targeted by individualized drills.
    pub targets: usize,
    pub drill: DrillConfig,
    /// n-grams per skill in the offline drill dataset.
    pub ngrams_per_skill: usize,
    /// Segment draws per n-gram in the offline drill dataset.
    pub drill_variants: usize,
    pub extractor: ExtractorConfig,
    pub time_heuristic_k: usize,
    pub reverse_keep: f64,
    pub student_epochs: usize,
    pub lr: f64,
    pub batch: usize,
    /// Practice pairs per setting (equal across settings).
    pub practice_pairs: usize,
    pub fine_tune_epochs: usize,
    pub fine_tune_lr: f64,
    pub fine_tune_batch: usize,
    /// Display offset added to rewards in charts only.
    pub reward_offset: f64,
}

impl ExperimentConfig {
    pub fn new(student: StudentKind) -> Self {
        ExperimentConfig {
            student,
            parking: ParkingParams::default(),
            seeds: (0..10).collect(),
            settings: vec![Setting::FullTrajectory, Setting::Drills, Setting::IndDrills],
            n_demos: match student {
                StudentKind::Reversing => 120,
                StudentKind::HalfTrained => 250,
            },
            pool_size: 25,
            pretest: 2,
            eval_per_set: 5,
            eval_sets: 15,
            targets: 3,
            drill: DrillConfig::parking(),
            ngrams_per_skill: 2,
            drill_variants: 4,
            extractor: ExtractorConfig::parking(),
            time_heuristic_k: 4,
            reverse_keep: 0.2,
            student_epochs: match student {
                StudentKind::Reversing => 400,
                StudentKind::HalfTrained => 50,
            },
            lr: 5e-4,
            batch: 256,
            practice_pairs: 2048,
            fine_tune_epochs: 100,
            fine_tune_lr: 5e-4,
            fine_tune_batch: 256,
            reward_offset: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.settings.is_empty() {
            return bad("at least one setting is required");
        }
        for (name, v) in [
            ("n_demos", self.n_demos),
            ("pool_size", self.pool_size),
            ("pretest", self.pretest),
            ("eval_per_set", self.eval_per_set),
            ("eval_sets", self.eval_sets),
            ("targets", self.targets),
            ("practice_pairs", self.practice_pairs),
            ("batch", self.batch),
            ("fine_tune_batch", self.fine_tune_batch),
            ("ngrams_per_skill", self.ngrams_per_skill),
            ("drill_variants", self.drill_variants),
            ("time_heuristic_k", self.time_heuristic_k),
        ] {
            if v == 0 {
                return Err(HarnessError::Config(format!("{name} must be >= 1")));
            }
        }
        if self.pool_size > self.n_demos {
            return bad("pool_size exceeds n_demos");
        }
        if self.pretest > self.pool_size {
            return bad("pretest exceeds pool_size");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn student_train(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.student_epochs,
            lr: self.lr,
            batch: self.batch,
            seed,
        }
    }

    fn fine_tune_cfg(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.fine_tune_epochs,
            lr: self.fine_tune_lr,
            batch: self.fine_tune_batch,
            seed,
        }
    }
}

/// Everything the settings share within one seed.
pub struct Prepared {
    pub seed: u64,
    pub env: EnvSpec,
    pub demos: Vec<Trajectory>,
    pub demos_by_id: BTreeMap<String, Trajectory>,
    /// Expert skill labels keyed by scenario id.
    pub labels: BTreeMap<String, Vec<usize>>,
    pub extractor: BuiltinExtractor,
    pub pool: Vec<String>,
    pub student: Mlp,
    pub student_losses: Vec<f64>,
    pub expertise: ExpertiseVector,
    pub drills: BTreeMap<usize, Vec<Drill>>,
    pub eval_scenarios: Vec<Scenario>,
}

pub fn expert_demos(env: &EnvSpec, n: usize, seed: u64) -> Result<Vec<Trajectory>> {
    let EnvSpec::Parking(p) = env else {
        return Err(HarnessError::Config("synthetic students need the parking env".into()));
    };
    let mut out = Vec::with_capacity(n);
    for sc in env.sample_scenarios(n, seed)? {
        let o = scripted_parking_expert(&sc, p)?;
        if o.success {
            out.push(o.trajectory);
        }
    }
    Ok(out)
}

/// Trains the synthetic student of the given kind on `demos`.
pub fn train_student(cfg: &ExperimentConfig, demos: &[Trajectory], seed: u64) -> Result<(Mlp, Vec<f64>)> {
    let data = BcDataset::from_trajectories(demos);
    let data = match cfg.student {
        StudentKind::Reversing => filter_reverse(&data, cfg.reverse_keep, seed),
        StudentKind::HalfTrained => data,
    };
    let mut net = Mlp::student(seed);
    let losses = bc_train(&mut net, &data, &cfg.student_train(seed))?;
    Ok((net, losses))
}

/// Offline drill dataset: for every skill with segments, its most frequent
/// n-grams, each drawn with several segment choices.
pub fn drill_dataset(
    cfg: &ExperimentConfig,
    env: &EnvSpec,
    demos_by_id: &BTreeMap<String, Trajectory>,
    labels: &BTreeMap<String, Vec<usize>>,
    extractor: &BuiltinExtractor,
    seed: u64,
) -> Result<BTreeMap<usize, Vec<Drill>>> {
    let table = ngram_frequencies(labels.values(), cfg.drill.n)?;
    let lib = &extractor.library;
    let mut out = BTreeMap::new();
    for m in lib.used_skills() {
        let grams = drill_ngrams(&table, lib, m, cfg.ngrams_per_skill);
        let mut ds = Vec::new();
        for (k, x) in grams.iter().enumerate() {
            for v in 0..cfg.drill_variants {
                let mut r = rng::derive(seed, &format!("drill-dataset/{m}/{k}/{v}"));
                let id = format!("drill-{m:02}-{k}-{v}");
                ds.push(build_drill(m, x, cfg.drill.n_rep, demos_by_id, lib, env, &mut r, &id)?);
            }
        }
        if !ds.is_empty() {
            out.insert(m, ds);
        }
    }
    Ok(out)
}

pub fn prepare(cfg: &ExperimentConfig, seed: u64) -> Result<Prepared> {
    cfg.validate()?;
    let env = EnvSpec::Parking(cfg.parking.clone());
    let demos = expert_demos(&env, cfg.n_demos, seed).map_err(HarnessError::stage("expert demos"))?;
    if demos.len() < cfg.pool_size {
        return Err(HarnessError::Config(format!(
            "only {} successful demonstrations for a pool of {}",
            demos.len(),
            cfg.pool_size
        )));
    }
    let extractor =
        fit_builtin(&demos, &cfg.extractor, seed).map_err(HarnessError::stage("skill extraction"))?;
    let by_traj = label_all(&extractor, &demos)?;
    let labels: BTreeMap<String, Vec<usize>> = demos
        .iter()
        .map(|d| (d.scenario.id.clone(), by_traj[&d.id].skills.clone()))
        .collect();
    let demos_by_id: BTreeMap<String, Trajectory> = demos.iter().map(|d| (d.id.clone(), d.clone())).collect();

    let pool = select_diverse_scenarios(&labels, cfg.pool_size).map_err(HarnessError::stage("scenario selection"))?;
    let (student, student_losses) =
        train_student(cfg, &demos, seed).map_err(HarnessError::stage("student training"))?;

    let by_scenario: BTreeMap<&str, &Trajectory> = demos.iter().map(|d| (d.scenario.id.as_str(), d)).collect();
    let pool_scenarios: Vec<Scenario> = pool.iter().map(|id| by_scenario[id.as_str()].scenario.clone()).collect();
    let rollouts = rollout_many(&student, &pool_scenarios, &env)?;
    let student_trajs: BTreeMap<String, Trajectory> =
        rollouts.into_iter().map(|t| (t.scenario.id.clone(), t)).collect();
    let expertise = assess_expertise(&pool, &labels, &student_trajs, &extractor)
        .map_err(HarnessError::stage("expertise assessment"))?;

    let drills = drill_dataset(cfg, &env, &demos_by_id, &labels, &extractor, seed)
        .map_err(HarnessError::stage("drill creation"))?;

    let n_eval = cfg.eval_sets * cfg.eval_per_set;
    let eval_scenarios = env.sample_scenarios(n_eval, seed ^ 0x5eed_e7a1)?;
    Ok(Prepared {
        seed,
        env,
        demos,
        demos_by_id,
        labels,
        extractor,
        pool,
        student,
        student_losses,
        expertise,
        drills,
        eval_scenarios,
    })
}

type Pair<'a> = (&'a Scenario, &'a StateVector, ActionVector);

/// Fills a dataset of exactly `n` pairs from whole practice units drawn in
/// seeded random order (reshuffled when exhausted); the last unit is
/// truncated.
fn fill<'a>(units: &[Vec<Pair<'a>>], n: usize, r: &mut rng::Rng) -> Vec<Pair<'a>> {
    let mut out = Vec::with_capacity(n);
    if units.iter().all(|u| u.is_empty()) {
        return out;
    }
    let mut order: Vec<usize> = (0..units.len()).collect();
    while out.len() < n {
        order.shuffle(r);
        for &i in &order {
            for p in &units[i] {
                if out.len() == n {
                    return out;
                }
                out.push(*p);
            }
        }
    }
    out
}

fn segment_pairs<'a>(d: &'a Trajectory, r: &SegmentRef) -> Vec<Pair<'a>> {
    d.steps[r.start..r.end].iter().map(|(s, a)| (&d.scenario, s, *a)).collect()
}

/// The `k` most frequent skills in the pool's expert labels, ties by id.
fn most_common(labels: &BTreeMap<String, Vec<usize>>, pool: &[String], k: usize) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for id in pool {
        for &m in &labels[id] {
            *counts.entry(m).or_default() += 1;
        }
    }
    let mut v: Vec<(usize, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().take(k).map(|(m, _)| m).collect()
}

/// Skills targeted by each drill setting.
pub fn drill_targets(cfg: &ExperimentConfig, prep: &Prepared, setting: Setting) -> Vec<usize> {
    let available: Vec<usize> = prep.drills.keys().copied().collect();
    match setting {
        Setting::IndDrills => {
            let mut e = prep.expertise.clone();
            e.scores.retain(|m, _| prep.drills.contains_key(m));
            e.lowest(cfg.targets)
        }
        Setting::Drills => {
            let mut r = rng::derive(prep.seed, "random-drill-targets");
            let mut v: Vec<usize> = available
                .choose_multiple(&mut r, cfg.targets.min(available.len()))
                .copied()
                .collect();
            v.sort_unstable();
            v
        }
        _ => Vec::new(),
    }
}

/// Practice pairs for one setting, exactly `cfg.practice_pairs` of them.
pub fn practice_set(cfg: &ExperimentConfig, prep: &Prepared, setting: Setting) -> Result<BcDataset> {
    let by_scenario: BTreeMap<&str, &Trajectory> =
        prep.demos.iter().map(|d| (d.scenario.id.as_str(), d)).collect();
    let units: Vec<Vec<Pair>> = match setting {
        Setting::FullTrajectory => prep
            .pool
            .iter()
            .map(|id| {
                let d = by_scenario[id.as_str()];
                d.steps.iter().map(|(s, a)| (&d.scenario, s, *a)).collect()
            })
            .collect(),
        Setting::Skills => {
            let common = most_common(&prep.labels, &prep.pool, cfg.targets);
            let lib = &prep.extractor.library;
            common
                .iter()
                .flat_map(|&m| lib.segments[m].iter())
                .map(|r| segment_pairs(&prep.demos_by_id[&r.trajectory_id], r))
                .collect()
        }
        Setting::TimeHeuristic => {
            let keep: BTreeSet<usize> = (0..cfg.targets.min(cfg.time_heuristic_k)).collect();
            let mut units = Vec::new();
            for id in &prep.pool {
                let d = by_scenario[id.as_str()];
                let seg = time_heuristic_extract(d, cfg.time_heuristic_k.min(d.len()))?;
                for (m, s, e) in seg.segments() {
                    if keep.contains(&m) {
                        units.push(segment_pairs(
                            d,
                            &SegmentRef {
                                trajectory_id: d.id.clone(),
                                start: s,
                                end: e,
                            },
                        ));
                    }
                }
            }
            units
        }
        Setting::Drills | Setting::IndDrills => {
            let targets = drill_targets(cfg, prep, setting);
            targets
                .iter()
                .flat_map(|m| prep.drills[m].iter())
                .map(|d| d.source_pairs(&prep.demos_by_id))
                .collect()
        }
    };
    let mut r = rng::derive(prep.seed, &format!("practice/{setting}"));
    let pairs = fill(&units, cfg.practice_pairs, &mut r);
    if pairs.len() != cfg.practice_pairs {
        return Err(HarnessError::Empty(format!("no practice data for {setting}")));
    }
    Ok(BcDataset::from_pairs(pairs))
}

/// Mean reward of each consecutive block of `per_set` rewards.
pub fn set_means(rewards: &[f64], per_set: usize) -> Vec<f64> {
    rewards
        .chunks(per_set)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

pub fn evaluate(net: &Mlp, prep: &Prepared) -> Result<Vec<f64>> {
    Ok(rollout_many(net, &prep.eval_scenarios, &prep.env)?
        .into_iter()
        .map(|t| t.reward)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingOutcome {
    pub setting: Setting,
    pub targets: Vec<usize>,
    pub practice_pairs: usize,
    pub practice_reverse_fraction: f64,
    pub set_means: Vec<f64>,
    pub mean_reward: f64,
    /// Mean evaluation reward minus the untuned student's.
    pub improvement: f64,
    pub success_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub demos: usize,
    pub pool: Vec<String>,
    pub expertise_lowest: Vec<usize>,
    /// Mean acceleration of each targeted skill's library profile.
    pub target_mean_accel: Vec<f64>,
    pub student_final_loss: f64,
    pub base_set_means: Vec<f64>,
    pub base_mean_reward: f64,
    pub settings: Vec<SettingOutcome>,
}

impl SeedOutcome {
    pub fn setting(&self, s: Setting) -> Option<&SettingOutcome> {
        self.settings.iter().find(|o| o.setting == s)
    }
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    run_prepared(cfg, &prepare(cfg, seed)?)
}

/// Fine-tunes and evaluates every setting on an already prepared seed.
pub fn run_prepared(cfg: &ExperimentConfig, prep: &Prepared) -> Result<SeedOutcome> {
    let seed = prep.seed;
    let base = evaluate(&prep.student, prep)?;
    let base_mean = mean(&base)?;
    let mut settings = Vec::new();
    let mut sizes = BTreeSet::new();
    let mut practice = Vec::new();
    for &s in &cfg.settings {
        let data = practice_set(cfg, prep, s).map_err(HarnessError::stage("practice data"))?;
        sizes.insert(data.len());
        practice.push((s, data));
    }
    if sizes.len() != 1 {
        return Err(HarnessError::Config(format!("practice set sizes differ: {sizes:?}")));
    }
    for (s, data) in practice {
        let mut net = prep.student.clone();
        fine_tune(&mut net, &data, &cfg.fine_tune_cfg(seed)).map_err(HarnessError::stage("fine-tuning"))?;
        let rewards = evaluate(&net, prep)?;
        let m = mean(&rewards)?;
        let threshold = match &prep.env {
            EnvSpec::Parking(p) => -p.success_threshold,
            EnvSpec::Writing(_) => 0.0,
        };
        settings.push(SettingOutcome {
            setting: s,
            targets: drill_targets(cfg, prep, s),
            practice_pairs: data.len(),
            practice_reverse_fraction: data.reverse_fraction(),
            set_means: set_means(&rewards, cfg.eval_per_set),
            mean_reward: m,
            improvement: m - base_mean,
            success_rate: rewards.iter().filter(|&&r| r > threshold).count() as f64 / rewards.len() as f64,
        });
    }
    let lowest = drill_targets(cfg, prep, Setting::IndDrills);
    let target_mean_accel = lowest
        .iter()
        .map(|&m| prep.extractor.library.mean_second_component(m).unwrap_or(0.0))
        .collect();
    Ok(SeedOutcome {
        seed,
        demos: prep.demos.len(),
        pool: prep.pool.clone(),
        expertise_lowest: lowest,
        target_mean_accel,
        student_final_loss: prep.student_losses.last().copied().unwrap_or(f64::NAN),
        base_set_means: set_means(&base, cfg.eval_per_set),
        base_mean_reward: base_mean,
        settings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingSummary {
    pub setting: Setting,
    /// Per-seed mean evaluation reward.
    pub run_means: Vec<f64>,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_improvement: f64,
    pub std_improvement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: Setting,
    pub b: Setting,
    pub a_samples: Vec<f64>,
    pub b_samples: Vec<f64>,
    /// One-sided `a > b` p-value across the paired evaluation sets of each seed.
    pub per_seed_p_greater: Vec<f64>,
    /// Test across seeds on the run means, when there are enough seeds.
    pub across_seeds: Option<WilcoxonResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seeds: Vec<SeedOutcome>,
    pub summary: Vec<SettingSummary>,
    pub comparisons: Vec<Comparison>,
}

impl ExperimentReport {
    pub fn summary_for(&self, s: Setting) -> Option<&SettingSummary> {
        self.summary.iter().find(|x| x.setting == s)
    }

    pub fn comparison(&self, a: Setting, b: Setting) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.a == a && c.b == b)
    }
}

pub fn assemble_report(cfg: &ExperimentConfig, seeds: Vec<SeedOutcome>) -> Result<ExperimentReport> {
    let mut summary = Vec::new();
    for &s in &cfg.settings {
        let run_means: Vec<f64> = seeds.iter().filter_map(|o| o.setting(s)).map(|o| o.mean_reward).collect();
        let imps: Vec<f64> = seeds.iter().filter_map(|o| o.setting(s)).map(|o| o.improvement).collect();
        summary.push(SettingSummary {
            setting: s,
            mean_reward: mean(&run_means)?,
            std_reward: std_dev(&run_means),
            mean_improvement: mean(&imps)?,
            std_improvement: std_dev(&imps),
            run_means,
        });
    }
    let mut comparisons = Vec::new();
    for (i, &a) in cfg.settings.iter().enumerate() {
        for &b in &cfg.settings[..i] {
            let a_samples = summary.iter().find(|x| x.setting == a).unwrap().run_means.clone();
            let b_samples = summary.iter().find(|x| x.setting == b).unwrap().run_means.clone();
            let per_seed_p_greater = seeds
                .iter()
                .map(|o| {
                    let x = &o.setting(a).unwrap().set_means;
                    let y = &o.setting(b).unwrap().set_means;
                    wilcoxon_signed_rank(x, y).map(|w| w.p_greater).unwrap_or(1.0)
                })
                .collect();
            let across_seeds = wilcoxon_signed_rank(&a_samples, &b_samples).ok();
            comparisons.push(Comparison {
                a,
                b,
                a_samples,
                b_samples,
                per_seed_p_greater,
                across_seeds,
            });
        }
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        seeds,
        summary,
        comparisons,
    })
}

/// Runs every configured seed, several at a time, and assembles the report
/// in seed order.
pub fn run_synthetic_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cfg.seeds.len());
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<SeedOutcome>>>> = cfg.seeds.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&seed) = cfg.seeds.get(i) else { break };
                log::info!("seed {seed}");
                *slots[i].lock().unwrap() = Some(run_seed(cfg, seed));
            });
        }
    });
    let seeds = slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every seed ran"))
        .collect::<Result<Vec<_>>>()?;
    assemble_report(cfg, seeds)
}

/// Held-out eval MSE of a student trained per `cfg` on fresh demonstrations.
/// Reversing students are scored on held-out pairs after the same reverse
/// filter they were trained with.
pub fn student_eval_mse(cfg: &ExperimentConfig, seed: u64, held_out_demos: usize) -> Result<(f64, Vec<f64>)> {
    let env = EnvSpec::Parking(cfg.parking.clone());
    let demos = expert_demos(&env, cfg.n_demos, seed)?;
    let held = expert_demos(&env, held_out_demos, seed ^ 0x4e1d_0u64)?;
    let (net, losses) = train_student(cfg, &demos, seed)?;
    let data = BcDataset::from_trajectories(&held);
    let data = match cfg.student {
        StudentKind::Reversing => filter_reverse(&data, cfg.reverse_keep, seed),
        StudentKind::HalfTrained => data,
    };
    Ok((eval_mse(&net, &data), losses))
}

/// Reward of the reversing student after fine-tuning on a fixed set of
/// individualized drills for each epoch count, averaged over `rollouts`
/// random scenarios.
pub fn training_time_curve(
    cfg: &ExperimentConfig,
    seed: u64,
    epochs: &[usize],
    rollouts: usize,
) -> Result<Vec<(usize, f64)>> {
    let prep = prepare(cfg, seed)?;
    let targets = drill_targets(cfg, &prep, Setting::IndDrills);
    let units: Vec<Vec<Pair>> = targets
        .iter()
        .map(|m| prep.drills[m][0].source_pairs(&prep.demos_by_id))
        .collect();
    let data = BcDataset::from_pairs(units.into_iter().flatten());
    let scenarios = prep.env.sample_scenarios(rollouts, seed ^ 0x00c0_ffee)?;
    let mut out = Vec::with_capacity(epochs.len());
    for &e in epochs {
        let mut net = prep.student.clone();
        let mut tc = cfg.fine_tune_cfg(seed);
        tc.epochs = e;
        fine_tune(&mut net, &data, &tc)?;
        let r: Vec<f64> = rollout_many(&net, &scenarios, &prep.env)?.iter().map(|t| t.reward).collect();
        out.push((e, mean(&r)?));
    }
    Ok(out)
}
