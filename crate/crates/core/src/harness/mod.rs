//! Run configuration, report assembly and the command implementations behind
//! the `wienerlab` binary.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

pub use config::{Overrides, RunConfig};
pub use report::{write_atomic, RunReport, Status, SuiteResult, SCHEMA_VERSION};
pub use suites::{run_suite, run_verify, suite_names, SuiteParams};
