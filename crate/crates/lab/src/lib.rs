//! Configuration, study pipeline and report output for the clamped plate
//! laboratory.

pub mod config;
pub mod error;
pub mod report;
pub mod study;

pub use config::StudyConfig;
pub use error::LabError;
pub use report::emit_report;
pub use study::{convergence_study, run_study, sequence_suite, StudyReport};
