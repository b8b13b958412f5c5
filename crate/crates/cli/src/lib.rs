//! Benchmark harness around `fcomb-core`: corpus ingestion, the full
//! experiment matrix (teachers, distilled students, raw-target controls,
//! classical baselines), result persistence, and report generation.

pub mod baselines;
pub mod config;
pub mod corpus;
pub mod error;
pub mod experiment;
pub mod labels;
pub mod report;
pub mod synth;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ResultRecord, RunSummary};
