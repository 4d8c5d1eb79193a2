//! Kinematic bicycle parking task.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::types::{ActionVector, StateVector};

/// Rectangular lot, `[x_min, x_max] x [y_min, y_max]` in metres. The y axis
/// points down on screen, so positive y is the bottom half of the lot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LotGeometry {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// x coordinates of the parking spots in the bottom-right quadrant.
    pub spot_x: Vec<f64>,
    pub spot_y: f64,
    /// Probability that a sampled goal faces the lot centre, which the
    /// expert reaches by reversing in.
    pub back_in_prob: f64,
}

impl Default for LotGeometry {
    fn default() -> Self {
        LotGeometry {
            x_min: -60.0,
            x_max: 60.0,
            y_min: -40.0,
            y_max: 40.0,
            spot_x: (0..7).map(|i| 2.0 + 4.0 * i as f64).collect(),
            spot_y: 16.0,
            back_in_prob: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParkingParams {
    pub dt: f64,
    pub wheelbase: f64,
    pub max_accel: f64,
    pub max_steer: f64,
    pub max_speed: f64,
    pub lot: LotGeometry,
    pub weights: [f64; 6],
    /// Per-component normalisation applied before weighting.
    pub scales: [f64; 6],
    pub exponent: f64,
    pub success_threshold: f64,
    pub horizon: usize,
}

impl Default for ParkingParams {
    fn default() -> Self {
        ParkingParams {
            dt: 0.1,
            wheelbase: 5.0,
            max_accel: 5.0,
            max_steer: FRAC_PI_4,
            max_speed: 10.0,
            lot: LotGeometry::default(),
            weights: [1.0, 0.3, 0.0, 0.0, 0.02, 0.02],
            scales: [100.0, 100.0, 5.0, 5.0, 1.0, 1.0],
            exponent: 0.5,
            success_threshold: 0.12,
            horizon: 120,
        }
    }
}

pub fn heading(s: &[f64]) -> f64 {
    s[5].atan2(s[4])
}

/// Signed speed along the heading.
pub fn speed(s: &[f64]) -> f64 {
    s[2] * s[4] + s[3] * s[5]
}

pub fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

pub fn goal_pose(x: f64, y: f64, heading: f64) -> StateVector {
    StateVector(vec![x, y, 0.0, 0.0, heading.cos(), heading.sin()])
}

pub fn step(s: &StateVector, a: &ActionVector, p: &ParkingParams) -> StateVector {
    let s = s.as_slice();
    let a = a.clamped_unit();
    let steer = a.0[0] * p.max_steer;
    let accel = a.0[1] * p.max_accel;
    let (c, sn) = (s[4], s[5]);
    let v = speed(s);

    let x = (s[0] + s[2] * p.dt).clamp(p.lot.x_min, p.lot.x_max);
    let y = (s[1] + s[3] * p.dt).clamp(p.lot.y_min, p.lot.y_max);

    let dh = v / p.wheelbase * steer.tan() * p.dt;
    let (sd, cd) = dh.sin_cos();
    let mut c2 = c * cd - sn * sd;
    let mut s2 = sn * cd + c * sd;
    let norm = c2.hypot(s2);
    if (norm - 1.0).abs() > 1e-12 {
        c2 /= norm;
        s2 /= norm;
    }
    let v2 = (v + accel * p.dt).clamp(-p.max_speed, p.max_speed);
    StateVector(vec![x, y, v2 * c2, v2 * s2, c2, s2])
}

/// Weighted error `sum_i w_i |s_i - g_i| / scale_i`.
pub fn weighted_error(s: &StateVector, goal: &StateVector, p: &ParkingParams) -> f64 {
    s.as_slice()
        .iter()
        .zip(goal.as_slice())
        .zip(p.weights.iter().zip(&p.scales))
        .map(|((a, b), (w, sc))| w * (a - b).abs() / sc)
        .sum()
}

pub fn reward(s: &StateVector, goal: &StateVector, p: &ParkingParams) -> f64 {
    let e = weighted_error(s, goal, p);
    if e == 0.0 {
        0.0
    } else {
        -e.powf(p.exponent)
    }
}

pub fn is_success(s: &StateVector, goal: &StateVector, p: &ParkingParams) -> bool {
    reward(s, goal, p) > -p.success_threshold
}

pub fn in_lot(s: &StateVector, p: &ParkingParams) -> bool {
    let l = &p.lot;
    (l.x_min..=l.x_max).contains(&s[0]) && (l.y_min..=l.y_max).contains(&s[1])
}

/// Gains of the scripted docking controller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpertGains {
    pub forward_speed: f64,
    pub reverse_speed: f64,
    pub speed_gain: f64,
    pub steer_gain: f64,
    pub field_gain: f64,
    pub approach_angle: f64,
    pub reverse_angle: f64,
    pub hysteresis: f64,
}

impl Default for ExpertGains {
    fn default() -> Self {
        ExpertGains {
            forward_speed: 5.0,
            reverse_speed: -5.0,
            speed_gain: 0.5,
            steer_gain: 2.0,
            field_gain: 0.25,
            approach_angle: 75f64.to_radians(),
            reverse_angle: 110f64.to_radians(),
            hysteresis: 0.6,
        }
    }
}

/// Vector-field docking controller.
///
/// The car follows a desired travel direction that bends toward the spot's
/// entry axis as the lateral offset shrinks. When the travel error exceeds
/// `reverse_angle` it drives in the opposite direction to swing the car
/// around, which also yields the final reverse dock for back-in goals.
pub fn expert_action(
    s: &StateVector,
    goal: &StateVector,
    p: &ParkingParams,
    g: &ExpertGains,
) -> ActionVector {
    let s = s.as_slice();
    let h = heading(s);
    let v = speed(s);
    let gh = heading(goal.as_slice());
    let axis = if goal[1] >= 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
    let (uy, ux) = axis.sin_cos();
    let lat = -(s[0] - goal[0]) * uy + (s[1] - goal[1]) * ux;
    let psi = axis - g.approach_angle * (g.field_gain * lat).tanh();

    let main = if wrap_angle(gh - axis).abs() < FRAC_PI_2 { 1.0 } else { -1.0 };
    let travel = if main > 0.0 { h } else { wrap_angle(h + PI) };
    let err = wrap_angle(psi - travel);
    let thr = if v * main < -0.05 {
        g.reverse_angle * g.hysteresis
    } else {
        g.reverse_angle
    };
    let dir = if err.abs() > thr { -main } else { main };
    let vd = if dir > 0.0 { g.forward_speed } else { g.reverse_speed };
    let sgn = if v.abs() > 0.1 { v.signum() } else { vd.signum() };
    let steer = (sgn * g.steer_gain * err / p.max_steer).clamp(-1.0, 1.0);
    let accel = (g.speed_gain * (vd - v)).clamp(-1.0, 1.0);
    ActionVector([steer, accel])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_action_at_rest_is_fixed_point() {
        let p = ParkingParams::default();
        let s = goal_pose(3.0, -2.0, 0.7);
        let n = step(&s, &ActionVector::new(0.0, 0.0), &p);
        assert_eq!(s, n);
    }

    #[test]
    fn full_accel_from_rest() {
        let p = ParkingParams::default();
        let h: f64 = 0.3;
        let s = goal_pose(0.0, 0.0, h);
        let n = step(&s, &ActionVector::new(0.0, 1.0), &p);
        assert!((speed(n.as_slice()) - 0.5).abs() < 1e-12);
        assert!((n[2] - 0.5 * h.cos()).abs() < 1e-12);
        assert!((n[3] - 0.5 * h.sin()).abs() < 1e-12);
        assert_eq!((n[0], n[1]), (0.0, 0.0));
    }

    #[test]
    fn reward_zero_at_goal_and_negative_elsewhere() {
        let p = ParkingParams::default();
        let g = goal_pose(10.0, 16.0, FRAC_PI_2);
        assert_eq!(reward(&g, &g, &p), 0.0);
        let mut s = g.clone();
        s.0[0] += 0.01;
        assert!(reward(&s, &g, &p) < 0.0);
    }

    #[test]
    fn wrap_range() {
        for k in -20..20 {
            let a = wrap_angle(k as f64 * 0.7);
            assert!((-PI..PI).contains(&a));
        }
    }
}
