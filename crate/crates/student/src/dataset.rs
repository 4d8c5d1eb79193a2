//! Goal-conditioned `(input, action)` pairs.

use ndarray::{Array2, Axis};
use rand::seq::index::sample;
use teachkit_core::{rng, ActionVector, Scenario, StateVector, Trajectory};

use crate::features::{scenario_features, INPUT_DIM, OUTPUT_DIM};

#[derive(Clone, Debug, PartialEq)]
pub struct BcDataset {
    pub inputs: Array2<f64>,
    pub actions: Array2<f64>,
}

impl BcDataset {
    pub fn empty() -> Self {
        BcDataset {
            inputs: Array2::zeros((0, INPUT_DIM)),
            actions: Array2::zeros((0, OUTPUT_DIM)),
        }
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a Scenario, &'a StateVector, ActionVector)>,
    {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (sc, s, a) in pairs {
            x.extend(scenario_features(s, sc));
            y.extend(a.0);
        }
        let n = y.len() / OUTPUT_DIM;
        BcDataset {
            inputs: Array2::from_shape_vec((n, INPUT_DIM), x).expect("input shape"),
            actions: Array2::from_shape_vec((n, OUTPUT_DIM), y).expect("action shape"),
        }
    }

    pub fn from_trajectories(trajs: &[Trajectory]) -> Self {
        Self::from_pairs(
            trajs
                .iter()
                .flat_map(|t| t.steps.iter().map(move |(s, a)| (&t.scenario, s, *a))),
        )
    }

    pub fn len(&self) -> usize {
        self.actions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pairs whose acceleration component is negative.
    pub fn reverse_mask(&self) -> Vec<bool> {
        self.actions.column(1).iter().map(|&a| a < 0.0).collect()
    }

    pub fn reverse_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.reverse_mask().iter().filter(|&&r| r).count() as f64 / self.len() as f64
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        BcDataset {
            inputs: self.inputs.select(Axis(0), idx),
            actions: self.actions.select(Axis(0), idx),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.inputs.iter().chain(self.actions.iter()).all(|v| v.is_finite())
    }
}

/// Keeps every non-reverse pair and a seeded subset of
/// `round(keep_fraction * count)` reverse pairs, preserving order.
pub fn filter_reverse(data: &BcDataset, keep_fraction: f64, seed: u64) -> BcDataset {
    let keep_fraction = keep_fraction.clamp(0.0, 1.0);
    let mask = data.reverse_mask();
    let rev: Vec<usize> = (0..data.len()).filter(|&i| mask[i]).collect();
    let n_keep = (keep_fraction * rev.len() as f64).round() as usize;
    let mut keep = vec![true; data.len()];
    for &i in &rev {
        keep[i] = false;
    }
    let mut r = rng::derive(seed, "filter-reverse");
    for j in sample(&mut r, rev.len(), n_keep).into_iter() {
        keep[rev[j]] = true;
    }
    let idx: Vec<usize> = (0..data.len()).filter(|&i| keep[i]).collect();
    data.select(&idx)
}
