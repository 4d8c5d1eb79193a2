use crate::types::ActionVector;

/// Number of resampled points per segment feature.
pub const L_FEAT: usize = 16;

/// Linearly resamples an action sequence to `points` samples and flattens
/// them into `[a0_0, a0_1, a1_0, a1_1, ...]`.
pub fn resample(actions: &[ActionVector], points: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * points);
    let n = actions.len();
    if n == 0 {
        out.resize(2 * points, 0.0);
        return out;
    }
    for k in 0..points {
        let t = if points == 1 {
            0.0
        } else {
            k as f64 * (n - 1) as f64 / (points - 1) as f64
        };
        let i = (t.floor() as usize).min(n - 1);
        let f = t - i as f64;
        let a = actions[i].0;
        let b = actions[(i + 1).min(n - 1)].0;
        out.push(a[0] + (b[0] - a[0]) * f);
        out.push(a[1] + (b[1] - a[1]) * f);
    }
    out
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the nearest candidate. Ties keep the lower
/// index; `None` entries are skipped.
pub fn nearest<'a, I>(x: &[f64], candidates: I) -> Option<(usize, f64)>
where
    I: IntoIterator<Item = Option<&'a Vec<f64>>>,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.into_iter().enumerate() {
        let Some(c) = c else { continue };
        let d = dist2(x, c);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_endpoints_and_constant() {
        let a = vec![ActionVector::new(0.0, 1.0), ActionVector::new(3.0, 1.0)];
        let r = resample(&a, 4);
        assert_eq!(r, vec![0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0]);
        let single = resample(&a[..1], 3);
        assert_eq!(single, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }
}
