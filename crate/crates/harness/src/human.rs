//! Ingestion of logged practice sessions into per-user rewards and the
//! shared report format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use teachkit_core::session::{read_log, replay_log, Phase};

use crate::error::{HarnessError, Result};
use crate::metrics::{mean, reward_improvement, std_dev};
use crate::report::{emit_summary, write_json, SummaryRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanSession {
    pub session_id: String,
    pub username: String,
    pub env: String,
    pub setting: String,
    pub pretest: Vec<f64>,
    pub evaluation: Vec<f64>,
    pub improvement: f64,
    pub practiced_steps: usize,
    pub ratings: Vec<u8>,
    pub finalized: bool,
}

/// Replays one session log; every step and round reward is re-verified.
pub fn ingest_session(path: &Path) -> Result<HumanSession> {
    let s = replay_log(&read_log(path)?)?;
    let rewards = |p: Phase| s.rounds_in(p).map(|r| r.reward).collect::<Vec<f64>>();
    let (pretest, evaluation) = (rewards(Phase::Pretest), rewards(Phase::Evaluation));
    let improvement = reward_improvement(&pretest, &evaluation)
        .map_err(|_| HarnessError::Empty(format!("{}: session has no pretest or evaluation rounds", path.display())))?;
    Ok(HumanSession {
        session_id: s.session_id.clone(),
        username: s.username.clone(),
        env: s.env.name().to_string(),
        setting: s.setting.clone(),
        practiced_steps: s.practiced_steps(),
        ratings: s.survey.as_ref().map(|x| x.0.clone()).unwrap_or_default(),
        finalized: s.finalized,
        pretest,
        evaluation,
        improvement,
    })
}

/// Every finalized session log (`*.jsonl`) under `dir`, in file-name order.
/// Unfinished sessions are skipped.
pub fn ingest_dir(dir: &Path) -> Result<Vec<HumanSession>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let s = ingest_session(&p)?;
        if s.finalized {
            out.push(s);
        } else {
            log::warn!("skipping unfinished session {}", p.display());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanSummary {
    pub setting: String,
    pub users: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_improvement: f64,
    pub std_improvement: f64,
    pub mean_rating: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanReport {
    pub env: String,
    pub sessions: Vec<HumanSession>,
    pub summary: Vec<HumanSummary>,
}

/// Per-setting means over the users of one env. Settings appear in the order
/// of [`teachkit_core::curriculum::Setting::ALL`], unknown names last.
pub fn human_report(sessions: &[HumanSession], env: &str) -> Result<HumanReport> {
    let sessions: Vec<HumanSession> = sessions.iter().filter(|s| s.env == env).cloned().collect();
    if sessions.is_empty() {
        return Err(HarnessError::Empty(format!("no {env} sessions")));
    }
    let mut by: BTreeMap<(usize, String), Vec<&HumanSession>> = BTreeMap::new();
    for s in &sessions {
        let rank = teachkit_core::curriculum::Setting::parse(&s.setting)
            .and_then(|x| teachkit_core::curriculum::Setting::ALL.iter().position(|&y| y == x))
            .unwrap_or(usize::MAX);
        by.entry((rank, s.setting.clone())).or_default().push(s);
    }
    let mut summary = Vec::new();
    for ((_, setting), group) in by {
        let rewards: Vec<f64> = group.iter().map(|s| mean(&s.evaluation)).collect::<Result<_>>()?;
        let imps: Vec<f64> = group.iter().map(|s| s.improvement).collect();
        let ratings: Vec<f64> = group.iter().flat_map(|s| s.ratings.iter().map(|&r| r as f64)).collect();
        summary.push(HumanSummary {
            setting,
            users: group.len(),
            mean_reward: mean(&rewards)?,
            std_reward: std_dev(&rewards),
            mean_improvement: mean(&imps)?,
            std_improvement: std_dev(&imps),
            mean_rating: mean(&ratings).ok(),
        });
    }
    Ok(HumanReport {
        env: env.to_string(),
        sessions,
        summary,
    })
}

/// Writes `report.json`, `report.csv`, `users.csv` and `charts/*.svg`.
pub fn emit_human_report(report: &HumanReport, dir: &Path, reward_offset: f64) -> Result<Vec<PathBuf>> {
    let json = dir.join("report.json");
    write_json(&json, report)?;
    let rows: Vec<SummaryRow> = report
        .summary
        .iter()
        .map(|s| SummaryRow {
            setting: s.setting.clone(),
            n: s.users,
            mean_reward: s.mean_reward,
            std_reward: s.std_reward,
            mean_improvement: s.mean_improvement,
            std_improvement: s.std_improvement,
        })
        .collect();
    let mut files = vec![json];
    files.extend(emit_summary(dir, &rows, reward_offset, &format!("{} users", report.env))?);
    let mut users = String::from("session_id,username,setting,mean_pretest,mean_evaluation,improvement,practiced_steps\n");
    for s in &report.sessions {
        let _ = writeln!(
            users,
            "{},{},{},{},{},{},{}",
            s.session_id,
            s.username,
            s.setting,
            mean(&s.pretest)?,
            mean(&s.evaluation)?,
            s.improvement,
            s.practiced_steps
        );
    }
    let path = dir.join("users.csv");
    fs::write(&path, users).map_err(|e| HarnessError::io(&path, e))?;
    files.push(path);
    Ok(files)
}
