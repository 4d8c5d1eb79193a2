//! Skill extractors: map a trajectory to a [`SkillSegmentation`].

pub mod builtin;
pub mod changepoint;
pub mod features;
pub mod import;
pub mod kmeans;
pub mod time_heuristic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::types::{SkillSegmentation, StateVector, Trajectory};

pub use builtin::BuiltinExtractor;
pub use import::ImportedExtractor;
pub use time_heuristic::{time_heuristic_extract, TimeHeuristic};

pub trait SkillExtractor: Send + Sync {
    fn latent_dim(&self) -> usize;
    fn extract(&self, traj: &Trajectory) -> Result<SkillSegmentation>;
}

/// A `[start, end)` slice of a stored demonstration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentRef {
    pub trajectory_id: String,
    pub start: usize,
    pub end: usize,
}

impl SegmentRef {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Representative expert segments per skill.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkillLibrary {
    pub latent_dim: usize,
    pub segments: Vec<Vec<SegmentRef>>,
    /// Mean resampled action profile per skill, `None` for unused skills.
    pub profiles: Vec<Option<Vec<f64>>>,
}

impl SkillLibrary {
    /// Builds the library from labelled demonstrations, dropping segments
    /// shorter than `h_min`.
    pub fn from_labels(
        latent_dim: usize,
        demos: &[Trajectory],
        labels: &BTreeMap<String, SkillSegmentation>,
        h_min: usize,
    ) -> Result<Self> {
        let mut segments = vec![Vec::new(); latent_dim];
        let mut sums: Vec<Option<(Vec<f64>, usize)>> = vec![None; latent_dim];
        for d in demos {
            let Some(seg) = labels.get(&d.id) else { continue };
            let actions = d.action_vec();
            for (m, start, end) in seg.segments() {
                if m >= latent_dim {
                    return Err(CoreError::InvalidSegmentation(format!(
                        "skill {m} >= latent dim {latent_dim} in `{}`",
                        d.id
                    )));
                }
                if end - start < h_min {
                    continue;
                }
                segments[m].push(SegmentRef {
                    trajectory_id: d.id.clone(),
                    start,
                    end,
                });
                let f = features::resample(&actions[start..end], features::L_FEAT);
                let slot = sums[m].get_or_insert_with(|| (vec![0.0; f.len()], 0));
                slot.0.iter_mut().zip(&f).for_each(|(a, b)| *a += b);
                slot.1 += 1;
            }
        }
        for s in &mut segments {
            s.sort();
        }
        let profiles = sums
            .into_iter()
            .map(|o| o.map(|(s, n)| s.into_iter().map(|v| v / n as f64).collect()))
            .collect();
        Ok(SkillLibrary {
            latent_dim,
            segments,
            profiles,
        })
    }

    pub fn used_skills(&self) -> Vec<usize> {
        (0..self.latent_dim)
            .filter(|&m| !self.segments[m].is_empty())
            .collect()
    }

    /// Mean acceleration (second action component) over a skill's profile.
    pub fn mean_second_component(&self, m: usize) -> Option<f64> {
        let p = self.profiles.get(m)?.as_ref()?;
        let n = p.len() / 2;
        Some(p.iter().skip(1).step_by(2).sum::<f64>() / n as f64)
    }

    /// `{skill_id, representative_trace}` entries for display: the states of
    /// the first representative segment of each used skill.
    pub fn export_traces(&self, demos: &[Trajectory]) -> Vec<RepresentativeTrace> {
        let by_id: BTreeMap<&str, &Trajectory> = demos.iter().map(|d| (d.id.as_str(), d)).collect();
        let mut out = Vec::new();
        for m in self.used_skills() {
            let r = &self.segments[m][0];
            if let Some(t) = by_id.get(r.trajectory_id.as_str()) {
                let states = t.states();
                let end = (r.end + 1).min(states.len());
                out.push(RepresentativeTrace {
                    skill_id: m,
                    representative_trace: states[r.start..end].to_vec(),
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeTrace {
    pub skill_id: usize,
    pub representative_trace: Vec<StateVector>,
}

/// Labels every demonstration with `extractor`, keyed by trajectory id.
pub fn label_all(
    extractor: &dyn SkillExtractor,
    trajs: &[Trajectory],
) -> Result<BTreeMap<String, SkillSegmentation>> {
    trajs
        .iter()
        .map(|t| Ok((t.id.clone(), extractor.extract(t)?)))
        .collect()
}
