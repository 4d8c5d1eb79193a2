//! JSON interchange: demonstration sets, segmentation labels and raw stroke
//! records.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::envs::EnvSpec;
use crate::error::{CoreError, Result};
use crate::infill::{infill, points_to_trajectory};
use crate::types::{AgentTag, SkillSegmentation, Trajectory};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CoreError::io(path, e))
}

/// Parses a top-level JSON list record by record so errors carry the index.
pub fn parse_records<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text)?;
    values
        .into_iter()
        .enumerate()
        .map(|(index, v)| {
            serde_json::from_value(v).map_err(|e| CoreError::Record {
                index,
                message: e.to_string(),
            })
        })
        .collect()
}

fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    parse_records(&text)
}

/// Loads a demonstration file. Records without an id get
/// `<agent_tag>/<scenario id>`; records must have at least one step and a
/// state dimension matching their schema.
pub fn load_demonstrations(path: &Path) -> Result<Vec<Trajectory>> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    parse_demonstrations(&text)
}

pub fn parse_demonstrations(text: &str) -> Result<Vec<Trajectory>> {
    let mut out: Vec<Trajectory> = parse_records(text)?;
    for (index, t) in out.iter_mut().enumerate() {
        let dim = t.scenario.schema.state_dim();
        let bad = |message: String| CoreError::Record { index, message };
        if t.steps.is_empty() {
            return Err(bad("trajectory has no steps".into()));
        }
        if let Some(i) = t.steps.iter().position(|(s, _)| s.len() != dim) {
            return Err(bad(format!(
                "state {i} has {} components, schema {:?} needs {dim}",
                t.steps[i].0.len(),
                t.scenario.schema
            )));
        }
        if t.scenario.initial_state.len() != dim {
            return Err(bad("scenario initial_state has the wrong dimension".into()));
        }
        if t.id.is_empty() {
            t.id = Trajectory::default_id(t.agent_tag, &t.scenario.id);
        }
    }
    Ok(out)
}

pub fn export_demonstrations(trajs: &[Trajectory], path: &Path) -> Result<()> {
    write_json(path, trajs)
}

/// One imported segmentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRecord {
    pub trajectory_id: String,
    pub skills: Vec<usize>,
    pub boundaries: Vec<usize>,
}

impl SegmentationRecord {
    pub fn segmentation(&self) -> SkillSegmentation {
        SkillSegmentation {
            skills: self.skills.clone(),
            boundaries: self.boundaries.clone(),
        }
    }
}

pub fn load_segmentations(path: &Path) -> Result<Vec<SegmentationRecord>> {
    read_records(path)
}

pub fn parse_segmentations(text: &str) -> Result<Vec<SegmentationRecord>> {
    parse_records(text)
}

/// Raw pen strokes as captured from a drawing pad, in canvas pixels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrokeRecord {
    pub id: String,
    pub glyphs: Vec<String>,
    pub strokes: Vec<Vec<[f64; 2]>>,
    #[serde(default = "default_tag")]
    pub agent_tag: AgentTag,
}

fn default_tag() -> AgentTag {
    AgentTag::Expert
}

/// Joins the strokes into one trace, infills it and scores it against the
/// gold trace of the record's glyph sequence.
pub fn stroke_record_to_trajectory(rec: &StrokeRecord, env: &EnvSpec) -> Result<Trajectory> {
    let EnvSpec::Writing(p) = env else {
        return Err(CoreError::UnsupportedSchema {
            expected: crate::types::Schema::Writing2,
            found: env.schema(),
        });
    };
    let points: Vec<[f64; 2]> = rec.strokes.iter().flatten().copied().collect();
    if points.len() < 2 {
        return Err(CoreError::EmptyTrajectory(rec.id.clone()));
    }
    let mut scenario = env.writing_scenario(&format!("{}-scenario", rec.id), rec.glyphs.clone())?;
    scenario.initial_state = crate::StateVector(points[0].to_vec());
    let template = Trajectory {
        id: rec.id.clone(),
        scenario,
        agent_tag: rec.agent_tag,
        steps: Vec::new(),
        terminal: None,
        reward: 0.0,
    };
    let raw = points_to_trajectory(&template, &points);
    let mut t = infill(&raw, p.infill_threshold)?;
    t.scenario.horizon = t.scenario.horizon.max(t.len());
    t.reward = env.trajectory_reward(&t);
    Ok(t)
}
