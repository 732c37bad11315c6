//! Command-line orchestration: configuration, focal selection, the
//! end-to-end run, and reporting.

pub mod config;
pub mod report;
pub mod run;
pub mod select;

pub use config::{BackendChoice, FocalFilter, RunConfig};
pub use report::{report_render, ReportFormat, RunReport, WallTimings};
pub use run::{load_project, run, RunArtifacts, RunError};
pub use select::{resolve_method_name, select_focals, SelectError};

#[cfg(test)]
mod tests;
