//! Extractor backed by externally produced segmentations.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::extract::changepoint::partition_with_fallback;
use crate::extract::features::{dist2, nearest, resample, L_FEAT};
use crate::extract::{SkillExtractor, SkillLibrary};
use crate::io::SegmentationRecord;
use crate::types::{ActionVector, ExtractorConfig, SkillSegmentation, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportedExtractor {
    pub config: ExtractorConfig,
    pub labels: BTreeMap<String, SkillSegmentation>,
    pub library: SkillLibrary,
    /// Per-segment cost used when segmenting unseen trajectories.
    pub segment_penalty: f64,
    #[serde(skip)]
    by_actions: HashMap<Vec<u64>, String>,
}

fn action_key(a: &[ActionVector]) -> Vec<u64> {
    a.iter().flat_map(|v| [v.0[0].to_bits(), v.0[1].to_bits()]).collect()
}

/// Validates imported labels against the demonstrations and builds the
/// extractor. Labels naming unknown trajectories or violating the
/// segmentation invariants reject the whole import.
pub fn import_segmentations(
    records: &[SegmentationRecord],
    demos: &[Trajectory],
    config: &ExtractorConfig,
) -> Result<ImportedExtractor> {
    let by_id: BTreeMap<&str, &Trajectory> = demos.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut labels = BTreeMap::new();
    for r in records {
        let d = by_id
            .get(r.trajectory_id.as_str())
            .ok_or_else(|| CoreError::UnknownTrajectory(r.trajectory_id.clone()))?;
        let seg = r.segmentation();
        seg.check(d.len(), config.latent_dim).map_err(|e| {
            CoreError::InvalidSegmentation(format!("trajectory `{}`: {e}", r.trajectory_id))
        })?;
        labels.insert(r.trajectory_id.clone(), seg);
    }
    if labels.is_empty() {
        return Err(CoreError::Empty("no segmentation records".into()));
    }
    let library = SkillLibrary::from_labels(config.latent_dim, demos, &labels, 1)?;

    // Median distance of labelled segments to their own skill profile.
    let mut dists = Vec::new();
    for d in demos {
        let Some(seg) = labels.get(&d.id) else { continue };
        let a = d.action_vec();
        for (m, s, e) in seg.segments() {
            if let Some(p) = &library.profiles[m] {
                dists.push(dist2(&resample(&a[s..e], L_FEAT), p));
            }
        }
    }
    dists.sort_by(f64::total_cmp);
    let segment_penalty = dists.get(dists.len() / 2).copied().unwrap_or(1.0).max(1e-6);

    let mut ex = ImportedExtractor {
        config: config.clone(),
        labels,
        library,
        segment_penalty,
        by_actions: HashMap::new(),
    };
    ex.index(demos);
    Ok(ex)
}

impl ImportedExtractor {
    /// Rebuilds the action-sequence index, e.g. after deserializing.
    pub fn index(&mut self, demos: &[Trajectory]) {
        self.by_actions = demos
            .iter()
            .filter(|d| self.labels.contains_key(&d.id))
            .map(|d| (action_key(&d.action_vec()), d.id.clone()))
            .collect();
    }

    fn lookup(&self, traj: &Trajectory) -> Option<&SkillSegmentation> {
        if let Some(s) = self.labels.get(&traj.id) {
            if *s.boundaries.last().unwrap() == traj.len() {
                return Some(s);
            }
        }
        let id = self.by_actions.get(&action_key(&traj.action_vec()))?;
        self.labels.get(id)
    }
}

impl SkillExtractor for ImportedExtractor {
    fn latent_dim(&self) -> usize {
        self.config.latent_dim
    }

    fn extract(&self, traj: &Trajectory) -> Result<SkillSegmentation> {
        if traj.is_empty() {
            return Err(CoreError::EmptyTrajectory(traj.id.clone()));
        }
        if let Some(s) = self.lookup(traj) {
            return Ok(s.clone());
        }
        if self.library.used_skills().is_empty() {
            return Err(CoreError::Unfitted);
        }
        let a = traj.action_vec();
        let profiles = &self.library.profiles;
        let cost = |i: usize, j: usize| {
            let f = resample(&a[i..j], L_FEAT);
            nearest(&f, profiles.iter().map(Option::as_ref)).unwrap().1 + self.segment_penalty
        };
        let b = partition_with_fallback(a.len(), self.config.h_min, self.config.h_max, cost);
        let skills = b
            .windows(2)
            .map(|w| {
                let f = resample(&a[w[0]..w[1]], L_FEAT);
                nearest(&f, profiles.iter().map(Option::as_ref)).unwrap().0
            })
            .collect();
        SkillSegmentation::new(skills, b, a.len(), self.config.latent_dim)
    }
}
