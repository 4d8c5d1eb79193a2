//! Scenario selection, expertise identification and drill synthesis.

pub mod coverage;
pub mod drills;
pub mod expertise;
pub mod ngram;
pub mod setting;

pub use coverage::{select_diverse_scenarios, select_diverse_traced, SelectionStep};
pub use drills::{create_drills, Drill, DrillConfig};
pub use expertise::{assess_expertise, expertise_from_labels, ExpertiseVector};
pub use ngram::{ngram_frequencies, NGramTable};
pub use setting::Setting;
