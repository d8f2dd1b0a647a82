//! Bundled data files.

use crate::scenario::{parse_scenario, Scenario};

/// Five-fire chemistry lab used throughout the tests and the docs.
pub const LAB_SCENARIO_JSON: &str = include_str!("../../../fixtures/lab.json");

/// Completion times of ten trainees over six attempts (`user,attempt,time_s`).
pub const ATTEMPT_TABLES_CSV: &str = include_str!("../../../fixtures/paper_tables.csv");

pub fn lab_scenario() -> Scenario {
    parse_scenario(LAB_SCENARIO_JSON).expect("bundled lab scenario is valid")
}
