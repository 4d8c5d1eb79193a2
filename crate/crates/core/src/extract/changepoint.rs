//! Optimal partitioning with segment-length bounds.

use crate::types::ActionVector;

/// Minimizes `sum cost(i, j)` over partitions of `[0, len)` whose segment
/// lengths lie in `[h_min, h_max]`. Ties go to the earliest split point.
/// Returns the boundaries `0 = b_0 < ... < b_N = len`, or `None` when no
/// admissible partition exists.
pub fn optimal_partition<F>(len: usize, h_min: usize, h_max: usize, mut cost: F) -> Option<Vec<usize>>
where
    F: FnMut(usize, usize) -> f64,
{
    if len == 0 || h_min == 0 || h_min > h_max {
        return None;
    }
    let mut best = vec![f64::INFINITY; len + 1];
    let mut prev = vec![usize::MAX; len + 1];
    best[0] = 0.0;
    for j in h_min..=len {
        let lo = j.saturating_sub(h_max);
        for i in lo..=j - h_min {
            if !best[i].is_finite() {
                continue;
            }
            let c = best[i] + cost(i, j);
            if c < best[j] {
                best[j] = c;
                prev[j] = i;
            }
        }
    }
    if !best[len].is_finite() {
        return None;
    }
    let mut b = vec![len];
    let mut j = len;
    while j > 0 {
        j = prev[j];
        b.push(j);
    }
    b.reverse();
    Some(b)
}

/// Like [`optimal_partition`] but always succeeds: a trajectory shorter than
/// `h_min` is one segment, otherwise the lower bound is relaxed to 1.
pub fn partition_with_fallback<F>(len: usize, h_min: usize, h_max: usize, mut cost: F) -> Vec<usize>
where
    F: FnMut(usize, usize) -> f64,
{
    if len < h_min.max(1) {
        return vec![0, len];
    }
    if let Some(b) = optimal_partition(len, h_min, h_max, &mut cost) {
        return b;
    }
    optimal_partition(len, 1, h_max.max(1), &mut cost).unwrap_or_else(|| vec![0, len])
}

/// Prefix sums for O(1) within-segment squared deviation of 2-D actions.
pub struct SquaredErrorCost {
    s: Vec<[f64; 2]>,
    q: Vec<f64>,
}

impl SquaredErrorCost {
    pub fn new(actions: &[ActionVector]) -> Self {
        let mut s = Vec::with_capacity(actions.len() + 1);
        let mut q = Vec::with_capacity(actions.len() + 1);
        s.push([0.0, 0.0]);
        q.push(0.0);
        for a in actions {
            let l = *s.last().unwrap();
            s.push([l[0] + a.0[0], l[1] + a.0[1]]);
            q.push(q.last().unwrap() + a.0[0] * a.0[0] + a.0[1] * a.0[1]);
        }
        SquaredErrorCost { s, q }
    }

    /// `sum_{t in [i, j)} |a_t - mean|^2`.
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        let n = (j - i) as f64;
        let sx = self.s[j][0] - self.s[i][0];
        let sy = self.s[j][1] - self.s[i][1];
        let c = (self.q[j] - self.q[i]) - (sx * sx + sy * sy) / n;
        c.max(0.0)
    }
}

/// Penalized changepoint segmentation of an action stream.
pub fn segment_actions(actions: &[ActionVector], penalty: f64, h_min: usize, h_max: usize) -> Vec<usize> {
    let c = SquaredErrorCost::new(actions);
    partition_with_fallback(actions.len(), h_min, h_max, |i, j| c.cost(i, j) + penalty)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn piecewise(levels: &[(f64, usize)]) -> Vec<ActionVector> {
        levels
            .iter()
            .flat_map(|&(v, n)| std::iter::repeat(ActionVector::new(v, -v)).take(n))
            .collect()
    }

    #[test]
    fn recovers_level_changes() {
        let a = piecewise(&[(1.0, 7), (-1.0, 12), (0.5, 9)]);
        assert_eq!(segment_actions(&a, 0.5, 3, 20), vec![0, 7, 19, 28]);
    }

    #[test]
    fn respects_bounds() {
        let a = piecewise(&[(1.0, 30)]);
        let b = segment_actions(&a, 0.1, 4, 10);
        assert!(b.windows(2).all(|w| (4..=10).contains(&(w[1] - w[0]))));
    }

    #[test]
    fn short_input_is_one_segment() {
        let a = piecewise(&[(1.0, 2)]);
        assert_eq!(segment_actions(&a, 1.0, 5, 10), vec![0, 2]);
    }

    #[test]
    fn cost_matches_direct_sum() {
        let a = piecewise(&[(1.0, 3), (2.0, 2), (-0.5, 4)]);
        let c = SquaredErrorCost::new(&a);
        for i in 0..a.len() {
            for j in i + 1..=a.len() {
                let n = (j - i) as f64;
                let mx: f64 = a[i..j].iter().map(|v| v.0[0]).sum::<f64>() / n;
                let my: f64 = a[i..j].iter().map(|v| v.0[1]).sum::<f64>() / n;
                let d: f64 = a[i..j]
                    .iter()
                    .map(|v| (v.0[0] - mx).powi(2) + (v.0[1] - my).powi(2))
                    .sum();
                assert!((c.cost(i, j) - d).abs() < 1e-9);
            }
        }
    }
}
