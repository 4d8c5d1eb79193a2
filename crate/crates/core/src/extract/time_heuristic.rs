use crate::error::{CoreError, Result};
use crate::extract::SkillExtractor;
use crate::types::{SkillSegmentation, Trajectory};

/// Splits `len` steps into `k` near-equal, temporally ordered segments.
/// Earlier segments absorb the remainder.
pub fn time_heuristic_segments(len: usize, k: usize) -> Result<SkillSegmentation> {
    if k == 0 || k > len {
        return Err(CoreError::InvalidParameter(format!(
            "cannot split {len} steps into {k} segments"
        )));
    }
    let (q, r) = (len / k, len % k);
    let mut boundaries = Vec::with_capacity(k + 1);
    boundaries.push(0);
    let mut b = 0;
    for i in 0..k {
        b += q + usize::from(i < r);
        boundaries.push(b);
    }
    SkillSegmentation::new((0..k).collect(), boundaries, len, k)
}

pub fn time_heuristic_extract(traj: &Trajectory, k: usize) -> Result<SkillSegmentation> {
    time_heuristic_segments(traj.len(), k)
}

#[derive(Clone, Copy, Debug)]
pub struct TimeHeuristic {
    pub k: usize,
}

impl SkillExtractor for TimeHeuristic {
    fn latent_dim(&self) -> usize {
        self.k
    }

    fn extract(&self, traj: &Trajectory) -> Result<SkillSegmentation> {
        time_heuristic_extract(traj, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_remainder_splits() {
        let s = time_heuristic_segments(12, 3).unwrap();
        assert_eq!(s.boundaries, vec![0, 4, 8, 12]);
        assert_eq!(s.skills, vec![0, 1, 2]);
        assert_eq!(time_heuristic_segments(10, 3).unwrap().boundaries, vec![0, 4, 7, 10]);
        assert_eq!(time_heuristic_segments(7, 1).unwrap().boundaries, vec![0, 7]);
        assert!(time_heuristic_segments(2, 3).is_err());
        assert!(time_heuristic_segments(2, 0).is_err());
    }
}
