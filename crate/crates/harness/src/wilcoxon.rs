//! Wilcoxon signed-rank test for paired samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{HarnessError, Result};

/// Largest number of non-zero differences handled by exact enumeration.
pub const EXACT_MAX_N: usize = 12;
pub const MIN_PAIRS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Signed statistic `W+ - W-`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub p_two_sided: f64,
    /// `P(W+ >= observed)`: evidence that `a` exceeds `b`.
    pub p_greater: f64,
    /// `P(W+ <= observed)`.
    pub p_less: f64,
    pub exact: bool,
}

/// Midranks of `|d|`, doubled so they stay integral.
pub fn doubled_ranks(abs: &[f64]) -> Vec<u64> {
    let mut idx: Vec<usize> = (0..abs.len()).collect();
    idx.sort_by(|&i, &j| abs[i].total_cmp(&abs[j]));
    let mut ranks = vec![0u64; abs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && abs[idx[j + 1]] == abs[idx[i]] {
            j += 1;
        }
        // Positions i..=j share the average of ranks i+1..=j+1.
        let r2 = (i + 1 + j + 1) as u64;
        for &k in &idx[i..=j] {
            ranks[k] = r2;
        }
        i = j + 1;
    }
    ranks
}

/// Distribution of the doubled `W+` over all `2^n` equally likely sign
/// patterns, as counts indexed by value.
fn exact_counts(ranks2: &[u64]) -> Vec<u64> {
    let total: u64 = ranks2.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    for pattern in 0u32..(1u32 << ranks2.len()) {
        let mut w = 0u64;
        for (k, &r) in ranks2.iter().enumerate() {
            if pattern >> k & 1 == 1 {
                w += r;
            }
        }
        counts[w as usize] += 1;
    }
    counts
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(HarnessError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < MIN_PAIRS {
        return Err(HarnessError::TooFewPairs {
            min: MIN_PAIRS,
            got: a.len(),
        });
    }
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|&v| v != 0.0)
        .collect();
    if d.is_empty() {
        return Err(HarnessError::AllZero);
    }
    let n = d.len();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let r2 = doubled_ranks(&abs);
    let total2: u64 = r2.iter().sum();
    let wp2: u64 = d.iter().zip(&r2).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let w_plus = wp2 as f64 / 2.0;
    let w_minus = (total2 - wp2) as f64 / 2.0;

    let (p_greater, p_less, exact) = if n <= EXACT_MAX_N {
        let counts = exact_counts(&r2);
        let all = (1u64 << n) as f64;
        let ge: u64 = counts[wp2 as usize..].iter().sum();
        let le: u64 = counts[..=wp2 as usize].iter().sum();
        (ge as f64 / all, le as f64 / all, true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        // Tie correction from the doubled ranks: each tie group of size t
        // shares one doubled rank value.
        let mut sorted = r2.clone();
        sorted.sort_unstable();
        let mut tie = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            let t = (j - i) as f64;
            tie += t * t * t - t;
            i = j;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie / 48.0;
        let z = (w_plus - mean) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (1.0 - normal.cdf(z), normal.cdf(z), false)
    };
    let p_two_sided = (2.0 * p_greater.min(p_less)).min(1.0);
    Ok(WilcoxonResult {
        statistic: w_plus - w_minus,
        w_plus,
        w_minus,
        n,
        p_two_sided,
        p_greater,
        p_less,
        exact,
    })
}
