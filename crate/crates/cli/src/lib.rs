//! Scenario files, run reports and SVG figures for truncated tube domains.

pub mod figure;
pub mod report;
pub mod run;
pub mod scenario;

pub use report::{RunReport, Status};
pub use run::{run_file, run_scenario, write_outcome, Artifact, Outcome, Overrides};
pub use scenario::{Command, Scenario};
