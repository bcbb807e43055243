//! Scenario files, the audit runner and its reports.

mod bundled;
mod config;
mod plot;
mod report;
mod run;

pub use bundled::{all_bundled, bundled, bundled_names, BUNDLED};
pub use config::{
    parse_config, to_toml, ClassicalSpec, ClockSpec, Expectations, OutputSpec, ScenarioConfig, Suite, SystemKind,
    SystemSpec, Tolerances, MAX_EXTENDED_DIM,
};
pub use plot::{emit_plotdata, write_distribution};
pub use report::{AuditReport, Check, Comparison, Distribution, Environment, Miss, SweepPoint, TrajectoryRow};
pub use run::{run_scenario, run_suites};
