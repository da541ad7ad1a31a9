//! Scenario orchestration: configuration, Monte-Carlo measurement, sweeps,
//! result emission and the built-in invariant suite.

pub mod config;
pub mod emit;
pub mod run;
pub mod validate;

pub use config::{ScenarioConfig, Strategy, TARGET_EFFICIENCY};
pub use emit::{emit_results, parse_csv, render_csv, render_svg, OutputFormat, CSV_HEADER};
pub use run::{run_point, run_sweep, BerRecord, SweepSpec, SweepVariable};
