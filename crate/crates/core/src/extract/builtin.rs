//! Deterministic extractor: penalized changepoints on the action stream,
//! resampled segment features and seeded k-means.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::extract::changepoint::segment_actions;
use crate::extract::features::{nearest, resample, L_FEAT};
use crate::extract::{kmeans, SkillExtractor, SkillLibrary};
use crate::rng;
use crate::types::{ExtractorConfig, SkillSegmentation, Trajectory};

/// Penalty multipliers tried during fitting, relative to the base penalty.
pub const PENALTY_GRID: [f64; 9] = [0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyCandidate {
    pub penalty: f64,
    pub mean_segments: f64,
    pub entropy: f64,
    pub clusters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuiltinExtractor {
    pub config: ExtractorConfig,
    pub penalty: f64,
    /// Centroid of skill `m` at index `m`.
    pub centroids: Vec<Vec<f64>>,
    pub library: SkillLibrary,
    pub candidates: Vec<PenaltyCandidate>,
}

struct Clustering {
    centroids: Vec<Vec<f64>>,
    labels: Vec<(String, SkillSegmentation)>,
    mean_segments: f64,
    entropy: f64,
}

fn label_entropy(labels: &[(String, SkillSegmentation)], h_min: usize) -> f64 {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, seg) in labels {
        for (m, s, e) in seg.segments() {
            if e - s >= h_min {
                *counts.entry(m).or_default() += 1;
            }
        }
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum()
}

fn cluster(demos: &[&Trajectory], cfg: &ExtractorConfig, penalty: f64, seed: u64) -> Clustering {
    let mut bounds = Vec::with_capacity(demos.len());
    let mut feats = Vec::new();
    for d in demos {
        let a = d.action_vec();
        let b = segment_actions(&a, penalty, cfg.h_min, cfg.h_max);
        for w in b.windows(2) {
            feats.push(resample(&a[w[0]..w[1]], L_FEAT));
        }
        bounds.push(b);
    }
    let mut r = rng::derive(seed, "kmeans");
    let raw = kmeans::fit(&feats, cfg.latent_dim, &mut r, kmeans::MAX_ITER);

    // Relabel clusters by first occurrence in canonical demo order.
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order = Vec::new();
    let mut raw_labels = Vec::with_capacity(feats.len());
    for f in &feats {
        let (c, _) = nearest(f, raw.iter().map(Some)).expect("at least one centroid");
        let next = remap.len();
        let id = *remap.entry(c).or_insert_with(|| {
            order.push(c);
            next
        });
        raw_labels.push(id);
    }
    let centroids: Vec<Vec<f64>> = order.iter().map(|&c| raw[c].clone()).collect();

    let mut labels = Vec::with_capacity(demos.len());
    let mut k = 0;
    let mut total = 0usize;
    for (d, b) in demos.iter().zip(bounds) {
        let n = b.len() - 1;
        let skills = raw_labels[k..k + n].to_vec();
        k += n;
        total += n;
        labels.push((
            d.id.clone(),
            SkillSegmentation {
                skills,
                boundaries: b,
            },
        ));
    }
    let entropy = label_entropy(&labels, cfg.h_min);
    Clustering {
        centroids,
        labels,
        mean_segments: total as f64 / demos.len().max(1) as f64,
        entropy,
    }
}

/// Fits the extractor on expert demonstrations.
///
/// Candidate penalties are scaled from the mean per-step action variance
/// times the expected segment length. Candidates whose mean segment count
/// is within a factor of two of the expected count are preferred; among
/// them the highest skill-label entropy wins.
pub fn fit_builtin(demos: &[Trajectory], cfg: &ExtractorConfig, seed: u64) -> Result<BuiltinExtractor> {
    if demos.len() < cfg.latent_dim {
        return Err(CoreError::InvalidParameter(format!(
            "need at least {} demonstrations, got {}",
            cfg.latent_dim,
            demos.len()
        )));
    }
    if cfg.h_min == 0 || cfg.h_min > cfg.h_max {
        return Err(CoreError::InvalidParameter("need 1 <= h_min <= h_max".into()));
    }
    if let Some(d) = demos.iter().find(|d| d.is_empty()) {
        return Err(CoreError::EmptyTrajectory(d.id.clone()));
    }
    let mut sorted: Vec<&Trajectory> = demos.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let mut var_sum = 0.0;
    for d in &sorted {
        let n = d.len() as f64;
        let mut m = [0.0; 2];
        for a in d.actions() {
            m[0] += a.0[0] / n;
            m[1] += a.0[1] / n;
        }
        let v: f64 = d
            .actions()
            .map(|a| (a.0[0] - m[0]).powi(2) + (a.0[1] - m[1]).powi(2))
            .sum::<f64>()
            / n;
        var_sum += v;
    }
    let base = (var_sum / sorted.len() as f64 * cfg.segment_length as f64).max(1e-9);

    let expected = cfg.segments_per_demo as f64;
    let mut best: Option<(usize, Clustering)> = None;
    let mut candidates = Vec::new();
    for (ci, mult) in PENALTY_GRID.iter().enumerate() {
        let c = cluster(&sorted, cfg, base * mult, seed);
        candidates.push(PenaltyCandidate {
            penalty: base * mult,
            mean_segments: c.mean_segments,
            entropy: c.entropy,
            clusters: c.centroids.len(),
        });
        let better = match &best {
            None => true,
            Some((_, b)) => {
                let key = |x: &Clustering| {
                    let in_band = x.mean_segments >= expected / 2.0 && x.mean_segments <= expected * 2.0;
                    (in_band, x.entropy, -(x.mean_segments - expected).abs())
                };
                let (ia, ea, ca) = key(&c);
                let (ib, eb, cb) = key(b);
                match (ia, ib) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => ea > eb + 1e-12 || ((ea - eb).abs() <= 1e-12 && ca > cb),
                    (false, false) => ca > cb,
                }
            }
        };
        if better {
            best = Some((ci, c));
        }
    }
    let (ci, chosen) = best.expect("non-empty penalty grid");
    if chosen.centroids.len() < 2 {
        log::warn!("skill extraction found a single cluster; demonstrations may be degenerate");
    }
    let labels: BTreeMap<String, SkillSegmentation> = chosen.labels.into_iter().collect();
    let library = SkillLibrary::from_labels(cfg.latent_dim, demos, &labels, cfg.h_min)?;
    Ok(BuiltinExtractor {
        config: cfg.clone(),
        penalty: candidates[ci].penalty,
        centroids: chosen.centroids,
        library,
        candidates,
    })
}

impl BuiltinExtractor {
    pub fn library(&self) -> &SkillLibrary {
        &self.library
    }
}

impl SkillExtractor for BuiltinExtractor {
    fn latent_dim(&self) -> usize {
        self.config.latent_dim
    }

    fn extract(&self, traj: &Trajectory) -> Result<SkillSegmentation> {
        if self.centroids.is_empty() {
            return Err(CoreError::Unfitted);
        }
        if traj.is_empty() {
            return Err(CoreError::EmptyTrajectory(traj.id.clone()));
        }
        let a = traj.action_vec();
        let b = segment_actions(&a, self.penalty, self.config.h_min, self.config.h_max);
        let skills = b
            .windows(2)
            .map(|w| {
                let f = resample(&a[w[0]..w[1]], L_FEAT);
                nearest(&f, self.centroids.iter().map(Some)).unwrap().0
            })
            .collect();
        SkillSegmentation::new(skills, b, a.len(), self.config.latent_dim)
    }
}
