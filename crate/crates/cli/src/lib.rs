//! Scenario-driven verification on top of `wavemap-core`: load a TOML scenario, evaluate the
//! declared checks on sampled points, and emit a text or JSON report.

pub mod checks;
pub mod commands;
pub mod report;
pub mod scenario;

pub use checks::{run_checks, CheckKind, CheckReport, CheckSpec, RunOptions, Status};
pub use commands::{execute, Cli};
pub use report::{emit_report, exit_code, Format, ReportHeader};
pub use scenario::{load_scenario, parse_scenario, Sampling, Scenario, ScenarioError};
