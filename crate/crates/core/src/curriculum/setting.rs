//! Practice settings compared in experiments and user sessions.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    FullTrajectory,
    Skills,
    TimeHeuristic,
    Drills,
    IndDrills,
}

impl Setting {
    pub const ALL: [Setting; 5] = [
        Setting::FullTrajectory,
        Setting::Skills,
        Setting::TimeHeuristic,
        Setting::Drills,
        Setting::IndDrills,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Setting::FullTrajectory => "full_trajectory",
            Setting::Skills => "skills",
            Setting::TimeHeuristic => "time_heuristic",
            Setting::Drills => "drills",
            Setting::IndDrills => "ind_drills",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.as_str() == s)
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
