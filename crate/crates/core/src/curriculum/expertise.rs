//! Per-skill expertise from reward-weighted, position-discounted skill misses.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::extract::SkillExtractor;
use crate::types::Trajectory;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpertiseVector {
    /// `E_m` for every skill id, all `<= 0`.
    pub scores: BTreeMap<usize, f64>,
    /// Scenarios the assessment was computed from.
    pub scenarios: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpertiseRecord {
    pub skill_id: usize,
    #[serde(rename = "E")]
    pub e: f64,
}

impl ExpertiseVector {
    pub fn get(&self, m: usize) -> f64 {
        self.scores.get(&m).copied().unwrap_or(0.0)
    }

    /// The `k` skills with lowest expertise, ties by lowest id.
    pub fn lowest(&self, k: usize) -> Vec<usize> {
        let mut v: Vec<(usize, f64)> = self.scores.iter().map(|(&m, &e)| (m, e)).collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        v.into_iter().take(k).map(|(m, _)| m).collect()
    }

    pub fn records(&self) -> Vec<ExpertiseRecord> {
        self.scores
            .iter()
            .map(|(&skill_id, &e)| ExpertiseRecord { skill_id, e })
            .collect()
    }
}

/// `E_m = -sum_xi Delta_m` where a skill `m` at 1-based expert position `j`
/// missing from the student's skill set contributes `Delta_m = -r / j`.
pub fn expertise_from_labels(
    scenarios: &[String],
    expert: &BTreeMap<String, Vec<usize>>,
    student: &BTreeMap<String, Vec<usize>>,
    rewards: &BTreeMap<String, f64>,
    latent_dim: usize,
) -> Result<ExpertiseVector> {
    let mut scores: BTreeMap<usize, f64> = (0..latent_dim).map(|m| (m, 0.0)).collect();
    for xi in scenarios {
        let me = expert
            .get(xi)
            .ok_or_else(|| CoreError::MissingExpertLabels(xi.clone()))?;
        let ms = student
            .get(xi)
            .ok_or_else(|| CoreError::MissingStudentTrajectory(xi.clone()))?;
        let r = *rewards
            .get(xi)
            .ok_or_else(|| CoreError::MissingStudentTrajectory(xi.clone()))?;
        if r > 0.0 || r.is_nan() {
            return Err(CoreError::PositiveReward {
                scenario: xi.clone(),
                reward: r,
            });
        }
        let student_set: BTreeSet<usize> = ms.iter().copied().collect();
        for (pos, &m) in me.iter().enumerate() {
            if student_set.contains(&m) {
                continue;
            }
            let j = (pos + 1) as f64;
            let delta = -r / j;
            *scores.entry(m).or_insert(0.0) -= delta;
        }
    }
    Ok(ExpertiseVector {
        scores,
        scenarios: scenarios.to_vec(),
    })
}

/// Segments every student trajectory with `extractor` (the one fitted on the
/// expert data) and scores misses against the expert labels. Rewards are
/// read from the trajectories.
pub fn assess_expertise(
    scenarios: &[String],
    expert: &BTreeMap<String, Vec<usize>>,
    student_trajs: &BTreeMap<String, Trajectory>,
    extractor: &dyn SkillExtractor,
) -> Result<ExpertiseVector> {
    let mut student = BTreeMap::new();
    let mut rewards = BTreeMap::new();
    for xi in scenarios {
        let t = student_trajs
            .get(xi)
            .ok_or_else(|| CoreError::MissingStudentTrajectory(xi.clone()))?;
        student.insert(xi.clone(), extractor.extract(t)?.skills);
        rewards.insert(xi.clone(), t.reward);
    }
    expertise_from_labels(scenarios, expert, &student, &rewards, extractor.latent_dim())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(me: Vec<usize>, ms: Vec<usize>, r: f64) -> ExpertiseVector {
        let s = vec!["x".to_string()];
        let e = BTreeMap::from([("x".to_string(), me)]);
        let st = BTreeMap::from([("x".to_string(), ms)]);
        let rw = BTreeMap::from([("x".to_string(), r)]);
        expertise_from_labels(&s, &e, &st, &rw, 4).unwrap()
    }

    #[test]
    fn hand_traced_cases() {
        let e = one(vec![1, 2, 3], vec![1, 3], -10.0);
        assert_eq!(e.get(2), -5.0);
        assert_eq!((e.get(1), e.get(3), e.get(0)), (0.0, 0.0, 0.0));
        assert_eq!(one(vec![2, 0, 1], vec![0, 1], -6.0).get(2), -6.0);
        assert_eq!(one(vec![0, 1, 2], vec![0, 1], -6.0).get(2), -2.0);
        assert!(one(vec![0, 1], vec![1, 0], -3.0).scores.values().all(|&v| v == 0.0));
    }

    #[test]
    fn repeated_misses_accumulate() {
        let e = one(vec![2, 1, 2], vec![1], -6.0);
        assert_eq!(e.get(2), -6.0 - 2.0);
    }

    #[test]
    fn missing_student_names_scenario() {
        let s = vec!["x".to_string()];
        let e = BTreeMap::from([("x".to_string(), vec![0])]);
        let err = expertise_from_labels(&s, &e, &BTreeMap::new(), &BTreeMap::new(), 1).unwrap_err();
        assert!(err.to_string().contains("`x`"));
    }
}
