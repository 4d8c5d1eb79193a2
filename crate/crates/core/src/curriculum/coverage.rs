//! Greedy maximum coverage over the skill sets of expert demonstrations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub scenario: String,
    /// Skills newly covered by this pick.
    pub gain: usize,
    pub covered: usize,
}

/// Picks `n` scenarios, each maximizing the number of covered skills given
/// the earlier picks. Ties go to the lowest scenario id.
pub fn select_diverse_traced(
    labels: &BTreeMap<String, Vec<usize>>,
    n: usize,
) -> Result<Vec<SelectionStep>> {
    if labels.is_empty() {
        return Err(CoreError::Empty("no labelled scenarios".into()));
    }
    if n > labels.len() {
        return Err(CoreError::InvalidParameter(format!(
            "asked for {n} scenarios but only {} are labelled",
            labels.len()
        )));
    }
    let sets: Vec<(&String, BTreeSet<usize>)> = labels
        .iter()
        .map(|(k, v)| (k, v.iter().copied().collect()))
        .collect();
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut taken = vec![false; sets.len()];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize)> = None;
        for (i, (_, s)) in sets.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let gain = s.difference(&covered).count();
            if best.map_or(true, |(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let (i, gain) = best.expect("n <= number of scenarios");
        taken[i] = true;
        covered.extend(sets[i].1.iter().copied());
        out.push(SelectionStep {
            scenario: sets[i].0.clone(),
            gain,
            covered: covered.len(),
        });
    }
    Ok(out)
}

pub fn select_diverse_scenarios(labels: &BTreeMap<String, Vec<usize>>, n: usize) -> Result<Vec<String>> {
    Ok(select_diverse_traced(labels, n)?
        .into_iter()
        .map(|s| s.scenario)
        .collect())
}
