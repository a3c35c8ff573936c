//! Monte Carlo harness for Brownian motion on minimal graphs.
//!
//! Builds on `mbm-core` with deterministic parallel ensembles, interval estimates and
//! two-sample tests, JSON experiment specs and summaries, per-path CSV tables and the
//! `mbm` command line.

pub mod coupling;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod output;
pub mod reduced;
pub mod report;
pub mod run;
pub mod spec;
pub mod stats;

pub use error::HarnessError;
pub use report::SummaryReport;
pub use run::{check_numerical, run, write_outputs, RunOutput};
pub use spec::{ExperimentKind, ExperimentSpec};
