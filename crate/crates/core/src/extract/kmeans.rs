//! Seeded k-means++ initialisation followed by Lloyd iterations.

use rand::Rng as _;

use crate::extract::features::{dist2, nearest};
use crate::rng::Rng;

pub const MAX_ITER: usize = 100;

/// Returns at most `k` centroids. Fewer are returned when the data has fewer
/// than `k` distinct points.
pub fn fit(points: &[Vec<f64>], k: usize, rng: &mut Rng, max_iter: usize) -> Vec<Vec<f64>> {
    if points.is_empty() || k == 0 {
        return Vec::new();
    }
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut u = rng.gen::<f64>() * total;
        let mut pick = points.len() - 1;
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 && u < d {
                pick = i;
                break;
            }
            u -= d;
        }
        let c = points[pick].clone();
        for (p, d) in points.iter().zip(d2.iter_mut()) {
            *d = d.min(dist2(p, &c));
        }
        centroids.push(c);
    }

    let dim = points[0].len();
    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (p, a) in points.iter().zip(assign.iter_mut()) {
            let (i, _) = nearest(p, centroids.iter().map(Some)).unwrap();
            if *a != i {
                *a = i;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (p, &a) in points.iter().zip(&assign) {
            sums[a].iter_mut().zip(p).for_each(|(s, v)| *s += v);
            counts[a] += 1;
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(counts) {
            if n > 0 {
                *c = s.into_iter().map(|v| v / n as f64).collect();
            }
        }
    }
    centroids
}
