use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use teachkit_core::curriculum::drills::{drill_ngrams, drills_for_targets, DrillRecord};
use teachkit_core::curriculum::{
    assess_expertise, ngram_frequencies, select_diverse_traced, DrillConfig, ExpertiseVector,
};
use teachkit_core::envs::{scripted_parking_expert, writing_expert, EnvSpec};
use teachkit_core::extract::builtin::fit_builtin;
use teachkit_core::extract::import::import_segmentations;
use teachkit_core::extract::{label_all, BuiltinExtractor, ImportedExtractor, SkillExtractor, SkillLibrary, TimeHeuristic};
use teachkit_core::io::{load_demonstrations, load_segmentations, read_json, write_json, SegmentationRecord};
use teachkit_core::{rng, ActionVector, AgentTag, CoreError, ExtractorConfig, Scenario, Trajectory};
use teachkit_harness::experiment::{train_student, Setting, StudentKind};
use teachkit_harness::human::{emit_human_report, human_report, ingest_dir};
use teachkit_harness::report::emit_report;
use teachkit_harness::{ExperimentConfig, ExperimentReport};
use teachkit_serve::{router, AssetConfig, Assets, Engine, ServeConfig};
use teachkit_student::checkpoint;

use crate::config::merge;
use crate::error::{require, CliError, Result};
use crate::{Command, Ctx, DrillArgs, EnvName, Method, PolicyName};

pub const DEMOS: &str = "demos.json";
pub const EXTRACTOR: &str = "extractor.json";
pub const LABELS: &str = "labels.json";
pub const SCENARIOS: &str = "scenarios.json";
pub const STUDENT: &str = "student.json";
pub const STUDENTS: &str = "students.json";
pub const EXPERTISE: &str = "expertise.json";
pub const DRILLS: &str = "drills";
pub const EXPERIMENT: &str = "experiment";
pub const REPORT: &str = "report";

type Done = (String, Vec<PathBuf>, Value);

pub fn dispatch(ctx: &Ctx, cmd: Command) -> Result<Done> {
    match cmd {
        Command::GenDemos {
            env,
            count,
            policy,
            scenarios,
            checkpoint,
            noise,
            out,
        } => gen_demos(ctx, env, count, policy, scenarios, checkpoint, noise, out),
        Command::FitExtractor {
            demos,
            method,
            latent_dim,
            import_labels,
            k,
            out,
        } => fit_extractor(ctx, demos, method, latent_dim, import_labels, k, out),
        Command::Extract { demos, extractor, out } => extract(ctx, demos, extractor, out),
        Command::SelectScenarios {
            demos,
            labels,
            pool_size,
            out,
        } => select_scenarios(ctx, demos, labels, pool_size, out),
        Command::Assess {
            scenarios,
            demos,
            labels,
            extractor,
            students,
            out,
        } => assess(ctx, scenarios, demos, labels, extractor, students, out),
        Command::MakeDrills {
            expertise,
            demos,
            labels,
            extractor,
            drill,
            out_dir,
        } => make_drills(ctx, expertise, demos, labels, extractor, drill, out_dir),
        Command::TrainStudent {
            demos,
            student,
            epochs,
            out,
        } => train(ctx, demos, student, epochs, out),
        Command::RunExperiment {
            env,
            student,
            runs,
            settings,
            drill,
            k,
            out_dir,
        } => run_experiment(ctx, env, student, runs, settings, drill, k, out_dir),
        Command::Serve { addr, tick_ms } => serve(ctx, &addr, tick_ms),
        Command::Report {
            sessions,
            env,
            experiment,
            out_dir,
        } => report(ctx, sessions, env, experiment, out_dir),
    }
}

fn env_spec(name: EnvName) -> EnvSpec {
    match name {
        EnvName::Parking => EnvSpec::parking(),
        EnvName::Writing => EnvSpec::writing(),
    }
}

fn env_from_config(ctx: &Ctx, flag: Option<EnvName>) -> Result<EnvSpec> {
    if let Some(e) = flag {
        return Ok(env_spec(e));
    }
    match ctx.config.env.as_deref() {
        None | Some("parking") => Ok(EnvSpec::parking()),
        Some("writing") => Ok(EnvSpec::writing()),
        Some(other) => Err(CliError::new("config", format!("unknown env `{other}`")).hint("use `parking` or `writing`")),
    }
}

fn load_demos(stage: &'static str, path: &Path) -> Result<(Vec<Trajectory>, EnvSpec)> {
    require(stage, path, "gen-demos")?;
    let demos = load_demonstrations(path).map_err(|e| schema_error(stage, path, e))?;
    let first = demos
        .first()
        .ok_or_else(|| CliError::new(stage, format!("{}: no demonstrations", path.display())))?;
    let env = EnvSpec::for_schema(first.scenario.schema);
    if let Some(d) = demos.iter().find(|d| d.scenario.schema != first.scenario.schema) {
        return Err(CliError::new(stage, format!("trajectory `{}` mixes schemas", d.id)));
    }
    Ok((demos, env))
}

fn schema_error(stage: &'static str, path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(stage, format!("{}: {e}", path.display())).hint("the file does not match the expected schema; regenerate it with the producing command")
}

fn read<T: serde::de::DeserializeOwned>(stage: &'static str, path: &Path, produced_by: &str) -> Result<T> {
    require(stage, path, produced_by)?;
    read_json(path).map_err(|e| schema_error(stage, path, e))
}

fn write<T: Serialize + ?Sized>(stage: &'static str, path: &Path, value: &T) -> Result<()> {
    write_json(path, value).map_err(CliError::at(stage))
}

fn gen_demos(
    ctx: &Ctx,
    env: Option<EnvName>,
    count: Option<usize>,
    policy: PolicyName,
    scenarios: Option<PathBuf>,
    checkpoint_path: Option<PathBuf>,
    noise: Option<f64>,
    out: Option<PathBuf>,
) -> Result<Done> {
    const STAGE: &str = "gen-demos";
    let (env, scenarios) = match &scenarios {
        Some(p) => {
            let sc: Vec<Scenario> = read(STAGE, p, "select-scenarios")?;
            let first = sc.first().ok_or_else(|| CliError::new(STAGE, "scenario file is empty"))?;
            let spec = EnvSpec::for_schema(first.schema);
            if let Some(e) = env {
                if env_spec(e).schema() != spec.schema() {
                    return Err(CliError::new(STAGE, "--env disagrees with the scenario file"));
                }
            }
            (spec, sc)
        }
        None => {
            let env = env_from_config(ctx, env)?;
            let n = count.or(ctx.config.count).unwrap_or(match env {
                EnvSpec::Parking(_) => 120,
                EnvSpec::Writing(_) => 40,
            });
            let sc = env.sample_scenarios(n, ctx.seed).map_err(CliError::at(STAGE))?;
            (env, sc)
        }
    };
    let noise = noise.or(ctx.config.noise).unwrap_or(0.3);
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(CliError::new(STAGE, "--noise must be a finite value >= 0"));
    }
    let mut trajs = Vec::with_capacity(scenarios.len());
    let mut dropped = 0;
    match policy {
        PolicyName::Expert | PolicyName::Noisy => {
            for sc in &scenarios {
                let Some(t) = expert_trajectory(&env, sc).map_err(CliError::at(STAGE))? else {
                    dropped += 1;
                    continue;
                };
                if policy == PolicyName::Expert {
                    trajs.push(t);
                } else {
                    trajs.push(perturb(&env, &t, noise, ctx.seed));
                }
            }
        }
        PolicyName::Student => {
            if !matches!(env, EnvSpec::Parking(_)) {
                return Err(CliError::new(STAGE, "student policies exist for parking only").hint("use --policy noisy for writing"));
            }
            let path = ctx.path(&checkpoint_path, STUDENT);
            require(STAGE, &path, "train-student")?;
            let net = checkpoint::load(&path).map_err(|e| schema_error(STAGE, &path, e))?;
            trajs = teachkit_student::rollout_many(&net, &scenarios, &env).map_err(CliError::at(STAGE))?;
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} unsuccessful expert rollouts");
    }
    if trajs.is_empty() {
        return Err(CliError::new(STAGE, "no trajectories were produced"));
    }
    let default = if policy == PolicyName::Expert { DEMOS } else { STUDENTS };
    let out = ctx.path(&out, default);
    write(STAGE, &out, &trajs)?;
    let mean = trajs.iter().map(|t| t.reward).sum::<f64>() / trajs.len() as f64;
    Ok((
        format!("{} {} trajectories, mean reward {mean:.4}", trajs.len(), env.name()),
        vec![out],
        json!({"env": env.name(), "trajectories": trajs.len(), "dropped": dropped, "mean_reward": mean}),
    ))
}

/// The expert demonstration of a scenario; `None` when the parking expert
/// fails to park.
fn expert_trajectory(env: &EnvSpec, sc: &Scenario) -> teachkit_core::Result<Option<Trajectory>> {
    match env {
        EnvSpec::Parking(p) => {
            let o = scripted_parking_expert(sc, p)?;
            Ok(o.success.then_some(o.trajectory))
        }
        EnvSpec::Writing(_) => writing_expert(sc, env).map(Some),
    }
}

/// Replays the expert's actions with seeded uniform noise. Parking noise is
/// in control units; writing noise is relative to the mean pen step.
fn perturb(env: &EnvSpec, expert: &Trajectory, noise: f64, seed: u64) -> Trajectory {
    let mut r = rng::derive(seed, &format!("noisy/{}", expert.scenario.id));
    let scale = match env {
        EnvSpec::Parking(_) => noise,
        EnvSpec::Writing(_) => {
            let n = expert.len() as f64;
            noise * expert.actions().map(|a| a.0[0].hypot(a.0[1])).sum::<f64>() / n
        }
    };
    let mut s = expert.initial_state().expect("non-empty expert").clone();
    let mut steps = Vec::with_capacity(expert.len());
    for a in expert.actions() {
        let mut a = ActionVector([a.0[0] + scale * r.gen_range(-1.0..1.0), a.0[1] + scale * r.gen_range(-1.0..1.0)]);
        if matches!(env, EnvSpec::Parking(_)) {
            a = a.clamped_unit();
        }
        let next = env.step(&s, &a);
        steps.push((s, a));
        s = next;
    }
    let mut t = Trajectory {
        id: Trajectory::default_id(AgentTag::Student, &expert.scenario.id),
        scenario: expert.scenario.clone(),
        agent_tag: AgentTag::Student,
        steps,
        terminal: Some(s),
        reward: 0.0,
    };
    t.reward = env.trajectory_reward(&t);
    t
}

/// A stored extractor.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ExtractorFile {
    Builtin { extractor: BuiltinExtractor },
    Imported { extractor: ImportedExtractor },
    TimeHeuristic { k: usize },
}

impl ExtractorFile {
    fn load(stage: &'static str, path: &Path, demos: &[Trajectory]) -> Result<Self> {
        let mut f: ExtractorFile = read(stage, path, "fit-extractor")?;
        if let ExtractorFile::Imported { extractor } = &mut f {
            extractor.index(demos);
        }
        Ok(f)
    }

    fn extractor(&self) -> Box<dyn SkillExtractor + '_> {
        match self {
            ExtractorFile::Builtin { extractor } => Box::new(extractor.clone()),
            ExtractorFile::Imported { extractor } => Box::new(extractor.clone()),
            ExtractorFile::TimeHeuristic { k } => Box::new(TimeHeuristic { k: *k }),
        }
    }

    fn library(&self) -> Option<&SkillLibrary> {
        match self {
            ExtractorFile::Builtin { extractor } => Some(&extractor.library),
            ExtractorFile::Imported { extractor } => Some(&extractor.library),
            ExtractorFile::TimeHeuristic { .. } => None,
        }
    }
}

fn fit_extractor(
    ctx: &Ctx,
    demos: Option<PathBuf>,
    method: Method,
    latent_dim: Option<usize>,
    import_labels: Option<PathBuf>,
    k: Option<usize>,
    out: Option<PathBuf>,
) -> Result<Done> {
    const STAGE: &str = "fit-extractor";
    if import_labels.is_some() != (method == Method::Import) {
        return Err(CliError::new(STAGE, "--import-labels goes with --method import and nothing else"));
    }
    if k.is_some() && method != Method::TimeHeuristic {
        return Err(CliError::new(STAGE, "--k goes with --method time-heuristic only"));
    }
    let (demos, env) = load_demos(STAGE, &ctx.path(&demos, DEMOS))?;
    let mut cfg = match env {
        EnvSpec::Parking(_) => ExtractorConfig::parking(),
        EnvSpec::Writing(_) => ExtractorConfig::writing(),
    };
    if let Some(d) = latent_dim.or(ctx.config.latent_dim) {
        cfg.latent_dim = d;
    }
    let file = match method {
        Method::Builtin => ExtractorFile::Builtin {
            extractor: fit_builtin(&demos, &cfg, ctx.seed).map_err(CliError::at(STAGE))?,
        },
        Method::Import => {
            let p = import_labels.expect("checked above");
            require(STAGE, &p, "an external segmenter")?;
            let records = load_segmentations(&p).map_err(|e| schema_error(STAGE, &p, e))?;
            ExtractorFile::Imported {
                extractor: import_segmentations(&records, &demos, &cfg).map_err(CliError::at(STAGE))?,
            }
        }
        Method::TimeHeuristic => {
            let k = k.or(ctx.config.k).unwrap_or(4);
            let shortest = demos.iter().map(Trajectory::len).min().unwrap_or(0);
            if k == 0 || k > shortest {
                return Err(CliError::new(STAGE, format!("--k must be in 1..={shortest}")));
            }
            ExtractorFile::TimeHeuristic { k }
        }
    };
    let out = ctx.path(&out, EXTRACTOR);
    write(STAGE, &out, &file)?;
    let used = file.library().map(|l| l.used_skills().len());
    Ok((
        format!("fitted {method:?} extractor on {} demonstrations", demos.len()),
        vec![out],
        json!({"method": format!("{method:?}"), "latent_dim": file.extractor().latent_dim(), "used_skills": used}),
    ))
}

fn extract(ctx: &Ctx, demos: Option<PathBuf>, extractor: Option<PathBuf>, out: Option<PathBuf>) -> Result<Done> {
    const STAGE: &str = "extract";
    let (demos, _) = load_demos(STAGE, &ctx.path(&demos, DEMOS))?;
    let file = ExtractorFile::load(STAGE, &ctx.path(&extractor, EXTRACTOR), &demos)?;
    let labels = label_all(file.extractor().as_ref(), &demos).map_err(CliError::at(STAGE))?;
    let records: Vec<SegmentationRecord> = demos
        .iter()
        .map(|d| {
            let s = &labels[&d.id];
            SegmentationRecord {
                trajectory_id: d.id.clone(),
                skills: s.skills.clone(),
                boundaries: s.boundaries.clone(),
            }
        })
        .collect();
    let out = ctx.path(&out, LABELS);
    write(STAGE, &out, &records)?;
    let segments: usize = records.iter().map(|r| r.skills.len()).sum();
    Ok((
        format!("labelled {} demonstrations, {segments} segments", records.len()),
        vec![out],
        json!({"trajectories": records.len(), "segments": segments}),
    ))
}

/// Expert skill sequences keyed by scenario id.
fn expert_labels(stage: &'static str, demos: &[Trajectory], path: &Path) -> Result<BTreeMap<String, Vec<usize>>> {
    require(stage, path, "extract")?;
    let records = load_segmentations(path).map_err(|e| schema_error(stage, path, e))?;
    let by_traj: BTreeMap<&str, &SegmentationRecord> = records.iter().map(|r| (r.trajectory_id.as_str(), r)).collect();
    let mut out = BTreeMap::new();
    for d in demos {
        let r = by_traj.get(d.id.as_str()).ok_or_else(|| {
            CliError::new(stage, format!("no labels for trajectory `{}`", d.id)).hint("re-run `teachkit extract` on the current demonstrations")
        })?;
        out.insert(d.scenario.id.clone(), r.skills.clone());
    }
    Ok(out)
}

fn select_scenarios(
    ctx: &Ctx,
    demos: Option<PathBuf>,
    labels: Option<PathBuf>,
    pool_size: Option<usize>,
    out: Option<PathBuf>,
) -> Result<Done> {
    const STAGE: &str = "select-scenarios";
    let (demos, env) = load_demos(STAGE, &ctx.path(&demos, DEMOS))?;
    let labels = expert_labels(STAGE, &demos, &ctx.path(&labels, LABELS))?;
    let n = pool_size.or(ctx.config.pool_size).unwrap_or(match env {
        EnvSpec::Parking(_) => 25,
        EnvSpec::Writing(_) => 15,
    });
    let steps = select_diverse_traced(&labels, n).map_err(CliError::at(STAGE))?;
    let by_scenario: BTreeMap<&str, &Scenario> = demos.iter().map(|d| (d.scenario.id.as_str(), &d.scenario)).collect();
    let chosen: Vec<Scenario> = steps.iter().map(|s| by_scenario[s.scenario.as_str()].clone()).collect();
    let out = ctx.path(&out, SCENARIOS);
    write(STAGE, &out, &chosen)?;
    let covered = steps.last().map_or(0, |s| s.covered);
    Ok((
        format!("selected {} scenarios covering {covered} skills", chosen.len()),
        vec![out],
        json!({"selection": steps}),
    ))
}

fn assess(
    ctx: &Ctx,
    scenarios: Option<PathBuf>,
    demos: Option<PathBuf>,
    labels: Option<PathBuf>,
    extractor: Option<PathBuf>,
    students: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<Done> {
    const STAGE: &str = "assess";
    let scenarios_path = ctx.path(&scenarios, SCENARIOS);
    let scenarios: Vec<Scenario> = read(STAGE, &scenarios_path, "select-scenarios")?;
    let (demos, env) = load_demos(STAGE, &ctx.path(&demos, DEMOS))?;
    let labels = expert_labels(STAGE, &demos, &ctx.path(&labels, LABELS))?;
    let file = ExtractorFile::load(STAGE, &ctx.path(&extractor, EXTRACTOR), &demos)?;
    let students_path = ctx.path(&students, STUDENTS);
    require(STAGE, &students_path, "gen-demos --policy student --scenarios <scenarios.json>")?;
    let trajs = load_demonstrations(&students_path).map_err(|e| schema_error(STAGE, &students_path, e))?;
    let mut by_scenario = BTreeMap::new();
    for t in trajs {
        env.check_schema(t.scenario.schema).map_err(CliError::at(STAGE))?;
        by_scenario.insert(t.scenario.id.clone(), t);
    }
    let ids: Vec<String> = scenarios.iter().map(|s| s.id.clone()).collect();
    let e = assess_expertise(&ids, &labels, &by_scenario, file.extractor().as_ref()).map_err(|err| match err {
        CoreError::MissingStudentTrajectory(s) => CliError::new(STAGE, format!("no student trajectory for scenario `{s}`")).hint(format!(
            "roll the student out on every selected scenario: `teachkit gen-demos --policy student --scenarios {}`",
            scenarios_path.display()
        )),
        other => CliError::new(STAGE, other),
    })?;
    let out = ctx.path(&out, EXPERTISE);
    write(STAGE, &out, &e)?;
    let weakest = e.lowest(3);
    Ok((
        format!("assessed {} scenarios; weakest skills {weakest:?}", ids.len()),
        vec![out],
        json!({"expertise": e.records(), "weakest": weakest}),
    ))
}

fn drill_config(ctx: &Ctx, env: &EnvSpec, args: &DrillArgs) -> DrillConfig {
    let d = DrillConfig::for_env(env);
    let c = &ctx.config;
    DrillConfig {
        n: args.n.or(c.n).unwrap_or(d.n),
        n_rep: args.n_rep.or(c.n_rep).unwrap_or(d.n_rep),
        n_target: args.n_target.or(c.n_target).unwrap_or(d.n_target),
        n_drills: args.n_drills.or(c.n_drills).unwrap_or(d.n_drills),
    }
}

fn make_drills(
    ctx: &Ctx,
    expertise: Option<PathBuf>,
    demos: Option<PathBuf>,
    labels: Option<PathBuf>,
    extractor: Option<PathBuf>,
    args: DrillArgs,
    out_dir: Option<PathBuf>,
) -> Result<Done> {
    const STAGE: &str = "make-drills";
    let mut e: ExpertiseVector = read(STAGE, &ctx.path(&expertise, EXPERTISE), "assess")?;
    let (demos, env) = load_demos(STAGE, &ctx.path(&demos, DEMOS))?;
    let labels = expert_labels(STAGE, &demos, &ctx.path(&labels, LABELS))?;
    let file = ExtractorFile::load(STAGE, &ctx.path(&extractor, EXTRACTOR), &demos)?;
    let lib = file.library().ok_or_else(|| {
        CliError::new(STAGE, "the time-heuristic extractor has no skill library").hint("fit a builtin or imported extractor")
    })?;
    let cfg = drill_config(ctx, &env, &args);
    if cfg.n == 0 || cfg.n_rep == 0 || cfg.n_target == 0 || cfg.n_drills == 0 {
        return Err(CliError::new(STAGE, "drill hyperparameters must be >= 1"));
    }
    // Only skills with a usable n-gram can be drilled.
    let table = ngram_frequencies(labels.values(), cfg.n).map_err(CliError::at(STAGE))?;
    let drillable: BTreeSet<usize> = lib
        .used_skills()
        .into_iter()
        .filter(|&m| !drill_ngrams(&table, lib, m, 1).is_empty())
        .collect();
    e.scores.retain(|m, _| drillable.contains(m));
    let targets = e.lowest(cfg.n_target);
    if targets.len() < cfg.n_target {
        log::warn!("only {} drillable skills for {} targets", targets.len(), cfg.n_target);
    }
    let drills = drills_for_targets(&targets, &cfg, &demos, &labels, lib, &env, ctx.seed).map_err(CliError::at(STAGE))?;

    let dir = ctx.path(&out_dir, DRILLS);
    fs::create_dir_all(&dir).map_err(|err| CliError::new(STAGE, format!("{}: {err}", dir.display())))?;
    for entry in fs::read_dir(&dir).map_err(|err| CliError::new(STAGE, format!("{}: {err}", dir.display())))? {
        let p = entry.map_err(CliError::at(STAGE))?.path();
        let stale = p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("drill-") && n.ends_with(".json"));
        if stale {
            fs::remove_file(&p).map_err(|err| CliError::new(STAGE, format!("{}: {err}", p.display())))?;
        }
    }
    let mut files = Vec::new();
    let mut index = Vec::new();
    for m in &targets {
        for (k, d) in drills.get(m).into_iter().flatten().enumerate() {
            let name = format!("drill-{m:02}-{k}.json");
            let p = dir.join(&name);
            write(STAGE, &p, &DrillRecord::from(d))?;
            index.push(json!({"file": name, "target_skill": m, "expertise": e.get(*m), "ngram": d.ngram, "steps": d.actions.len()}));
            files.push(p);
        }
    }
    let idx = dir.join("index.json");
    write(STAGE, &idx, &json!({"config": cfg, "targets": targets, "drills": index}))?;
    let n = files.len();
    files.push(idx);
    Ok((
        format!("wrote {n} drills for skills {targets:?}"),
        files,
        json!({"targets": targets, "drills": n}),
    ))
}

fn student_kind(stage: &'static str, ctx: &Ctx, flag: Option<String>) -> Result<StudentKind> {
    let s = flag.or_else(|| ctx.config.student.clone()).unwrap_or_else(|| "reversing".into());
    StudentKind::parse(&s)
        .ok_or_else(|| CliError::new(stage, format!("unknown student `{s}`")).hint("use `reversing` or `half-trained`"))
}

fn train(ctx: &Ctx, demos: Option<PathBuf>, student: Option<String>, epochs: Option<usize>, out: Option<PathBuf>) -> Result<Done> {
    const STAGE: &str = "train-student";
    let kind = student_kind(STAGE, ctx, student)?;
    let (demos, env) = load_demos(STAGE, &ctx.path(&demos, DEMOS))?;
    if !matches!(env, EnvSpec::Parking(_)) {
        return Err(CliError::new(STAGE, "synthetic students exist for parking only"));
    }
    let mut cfg = ExperimentConfig::new(kind);
    if let Some(e) = epochs {
        cfg.student_epochs = e;
    }
    let (net, losses) = train_student(&cfg, &demos, ctx.seed).map_err(CliError::at(STAGE))?;
    let out = ctx.path(&out, STUDENT);
    checkpoint::save(&net, &out).map_err(CliError::at(STAGE))?;
    let last = losses.last().copied().unwrap_or(f64::NAN);
    Ok((
        format!("trained {kind:?} student, final loss {last:.5}"),
        vec![out],
        json!({"student": kind, "epochs": losses.len(), "final_loss": last}),
    ))
}

/// Default experiment configuration with the config file and flags applied.
pub fn experiment_config(
    ctx: &Ctx,
    kind: StudentKind,
    runs: Option<usize>,
    settings: &[String],
    drill: &DrillArgs,
    k: Option<usize>,
) -> Result<ExperimentConfig> {
    const STAGE: &str = "config";
    let mut v = serde_json::to_value(ExperimentConfig::new(kind)).expect("config serializes");
    if let Some(patch) = &ctx.config.experiment {
        merge(&mut v, patch);
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(v)
        .map_err(|e| CliError::new(STAGE, format!("experiment: {e}")).hint("keys mirror the fields of report.json's `config`"))?;
    let c = &ctx.config;
    let runs = runs.or(c.runs).unwrap_or(10);
    cfg.seeds = (0..runs as u64).map(|i| ctx.seed + i).collect();
    if !settings.is_empty() {
        cfg.settings = settings
            .iter()
            .map(|s| {
                Setting::parse(s).ok_or_else(|| {
                    CliError::new(STAGE, format!("unknown setting `{s}`")).hint("settings: full_trajectory, skills, time_heuristic, drills, ind_drills")
                })
            })
            .collect::<Result<_>>()?;
    }
    if let Some(n) = drill.n.or(c.n) {
        cfg.drill.n = n;
    }
    if let Some(n) = drill.n_rep.or(c.n_rep) {
        cfg.drill.n_rep = n;
    }
    if let Some(n) = drill.n_target.or(c.n_target) {
        cfg.targets = n;
    }
    if let Some(n) = drill.n_drills.or(c.n_drills) {
        cfg.ngrams_per_skill = n;
    }
    if let Some(n) = k.or(c.k) {
        cfg.time_heuristic_k = n;
    }
    cfg.validate().map_err(CliError::at(STAGE))?;
    Ok(cfg)
}

#[allow(clippy::too_many_arguments)]
fn run_experiment(
    ctx: &Ctx,
    env: EnvName,
    student: Option<String>,
    runs: Option<usize>,
    settings: Vec<String>,
    drill: DrillArgs,
    k: Option<usize>,
    out_dir: Option<PathBuf>,
) -> Result<Done> {
    const STAGE: &str = "run-experiment";
    if env != EnvName::Parking {
        return Err(CliError::new(STAGE, "synthetic students exist for parking only").hint("writing is studied with human sessions; see `teachkit serve`"));
    }
    let kind = student_kind(STAGE, ctx, student)?;
    let cfg = experiment_config(ctx, kind, runs, &settings, &drill, k)?;
    let report = teachkit_harness::run_synthetic_experiment(&cfg).map_err(CliError::at(STAGE))?;
    let dir = ctx.path(&out_dir, EXPERIMENT);
    let files = emit_report(&report, &dir).map_err(CliError::at(STAGE))?;
    let summary: Vec<Value> = report
        .summary
        .iter()
        .map(|s| json!({"setting": s.setting, "mean_reward": s.mean_reward, "std_reward": s.std_reward}))
        .collect();
    let line = report
        .summary
        .iter()
        .map(|s| format!("{} {:.4}", s.setting, s.mean_reward))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((
        format!("{} seeds: {line}", cfg.seeds.len()),
        files,
        json!({"config_hash": report.config_hash, "summary": summary}),
    ))
}

fn serve(ctx: &Ctx, addr: &str, tick_ms: Option<u64>) -> Result<Done> {
    const STAGE: &str = "serve";
    let mut assets = Vec::new();
    for env in [EnvSpec::parking(), EnvSpec::writing()] {
        let cfg = AssetConfig::for_env(&env, ctx.seed);
        assets.push(Assets::build(env, cfg).map_err(CliError::at(STAGE))?);
    }
    let engine = Engine::open(&ctx.root, assets).map_err(|e| {
        CliError::new(STAGE, e).hint("a session log could not be recovered; move it aside to start fresh")
    })?;
    let rt = tokio::runtime::Runtime::new().map_err(CliError::at(STAGE))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::new(STAGE, format!("{addr}: {e}")))?;
        let local = listener.local_addr().map_err(CliError::at(STAGE))?;
        eprintln!("listening on http://{local}");
        let app = router(Arc::new(engine), ServeConfig { tick_ms });
        teachkit_serve::serve(listener, app).await.map_err(CliError::at(STAGE))
    })?;
    Ok(("server stopped".into(), Vec::new(), Value::Null))
}

fn report(
    ctx: &Ctx,
    sessions: Option<PathBuf>,
    env: Option<EnvName>,
    experiment: Option<PathBuf>,
    out_dir: Option<PathBuf>,
) -> Result<Done> {
    const STAGE: &str = "report";
    let dir = ctx.path(&out_dir, REPORT);
    if let Some(p) = experiment {
        let r: ExperimentReport = read(STAGE, &p, "run-experiment")?;
        let files = emit_report(&r, &dir).map_err(CliError::at(STAGE))?;
        return Ok((format!("re-emitted experiment report {}", r.config_hash), files, json!({"config_hash": r.config_hash})));
    }
    let sdir = ctx.path(&sessions, "sessions");
    require(STAGE, &sdir, "serve")?;
    let all = ingest_dir(&sdir).map_err(CliError::at(STAGE))?;
    let envs: Vec<&str> = match env {
        Some(e) => vec![env_spec(e).name()],
        None => {
            let present: BTreeSet<&str> = all.iter().map(|s| s.env.as_str()).collect();
            present.into_iter().collect()
        }
    };
    if envs.is_empty() {
        return Err(CliError::new(STAGE, format!("no finalized sessions in {}", sdir.display())).hint("sessions count once their survey is submitted and they are finalized"));
    }
    let mut files = Vec::new();
    let mut data = serde_json::Map::new();
    for e in envs {
        let r = human_report(&all, e).map_err(CliError::at(STAGE))?;
        files.extend(emit_human_report(&r, &dir.join(e), 1.0).map_err(CliError::at(STAGE))?);
        data.insert(e.to_string(), serde_json::to_value(&r.summary).expect("summary serializes"));
    }
    Ok((format!("reported {} finalized sessions", all.len()), files, Value::Object(data)))
}
