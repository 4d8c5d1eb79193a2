//! Densifies pen traces so consecutive points are at most a threshold apart
//! (Chebyshev distance).

use crate::error::{CoreError, Result};
use crate::types::{ActionVector, Schema, StateVector, Trajectory};

fn chebyshev(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

pub fn infill_points(points: &[[f64; 2]], threshold: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(points.len());
    let Some(&first) = points.first() else {
        return out;
    };
    out.push(first);
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d = chebyshev(a, b);
        // The small slack keeps a second pass from splitting gaps that only
        // exceed the threshold through rounding.
        let k = ((d / threshold) - 1e-9).ceil().max(1.0) as usize;
        for i in 1..k {
            let t = i as f64 / k as f64;
            out.push([a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]);
        }
        out.push(b);
    }
    out
}

/// Inserts linearly interpolated states between writing states farther apart
/// than `threshold_px` and recomputes actions as displacements.
pub fn infill(traj: &Trajectory, threshold_px: f64) -> Result<Trajectory> {
    if traj.scenario.schema != Schema::Writing2 {
        return Err(CoreError::UnsupportedSchema {
            expected: Schema::Writing2,
            found: traj.scenario.schema,
        });
    }
    if !(threshold_px > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "infill threshold must be positive, got {threshold_px}"
        )));
    }
    if traj.is_empty() {
        return Err(CoreError::EmptyTrajectory(traj.id.clone()));
    }
    let mut pts: Vec<[f64; 2]> = traj.steps.iter().map(|(s, _)| [s[0], s[1]]).collect();
    let last = match &traj.terminal {
        Some(t) => [t[0], t[1]],
        None => {
            let (s, a) = traj.steps.last().unwrap();
            [s[0] + a.0[0], s[1] + a.0[1]]
        }
    };
    pts.push(last);
    let dense = infill_points(&pts, threshold_px);
    Ok(points_to_trajectory(traj, &dense))
}

/// Rebuilds `traj` over a new point sequence with displacement actions. The
/// last point becomes the terminal state.
pub fn points_to_trajectory(template: &Trajectory, points: &[[f64; 2]]) -> Trajectory {
    let steps = points
        .windows(2)
        .map(|w| {
            (
                StateVector(vec![w[0][0], w[0][1]]),
                ActionVector([w[1][0] - w[0][0], w[1][1] - w[0][1]]),
            )
        })
        .collect();
    let last = points.last().copied().unwrap_or([0.0, 0.0]);
    Trajectory {
        id: template.id.clone(),
        scenario: template.scenario.clone(),
        agent_tag: template.agent_tag,
        steps,
        terminal: Some(StateVector(vec![last[0], last[1]])),
        reward: template.reward,
    }
}
