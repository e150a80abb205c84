//! Experiment runner: parameter sweeps over the `hcran` toolkit with analytic
//! values next to Monte Carlo estimates, power allocation traces and
//! deterministic CSV/JSON output.
//!
//! Metrics are strategies registered by name in [`metrics`]; precoding
//! schemes come from the `hcran` scheme registry.

pub mod error;
pub mod experiment;
pub mod metrics;
pub mod output;
pub mod run;

pub use error::{CliError, Result};
pub use experiment::{parse_sweep, ExperimentFile, ExperimentSpec, SweepAxis};
pub use run::{run_crra_trace, run_experiment, ResultTable, Row, RunFailure, TracePoint};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
