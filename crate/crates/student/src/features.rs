//! Policy inputs: scaled state concatenated with the scaled goal pose.

use teachkit_core::{Scenario, StateVector};

pub const INPUT_DIM: usize = 12;
pub const OUTPUT_DIM: usize = 2;

const SCALE: [f64; 6] = [20.0, 20.0, 5.0, 5.0, 1.0, 1.0];

pub fn parking_features(state: &StateVector, goal: &StateVector) -> [f64; INPUT_DIM] {
    let mut f = [0.0; INPUT_DIM];
    for i in 0..6 {
        f[i] = state[i] / SCALE[i];
        f[6 + i] = goal[i] / SCALE[i];
    }
    f
}

/// Features for a parking scenario; non-parking scenarios get a zero goal.
pub fn scenario_features(state: &StateVector, scenario: &Scenario) -> [f64; INPUT_DIM] {
    match scenario.goal() {
        Some(g) => parking_features(state, g),
        None => parking_features(state, &StateVector(vec![0.0; 6])),
    }
}
