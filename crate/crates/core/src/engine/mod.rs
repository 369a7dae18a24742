//! Experiment driver: the synchronous round loop, convergence metrics and traces.

mod metrics;
mod runner;
mod trace;

use thiserror::Error;

pub use metrics::{
    consensus_error, def33_metric, def33_term, outer_iteration_bound, outer_iteration_bound_value,
    stationary_gap, Def33Accumulator, InitialConditions,
};
pub use runner::{epoch_budget, run, run_replicates, Def33Mode, RunOptions};
pub use trace::{RunRecord, RunTrace, CSV_HEADER};

use crate::algorithms::AlgorithmError;
use crate::objective::ObjectiveError;

/// Norm of the stacked states above which a run is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("diverged at (s={outer}, t={inner}): state norm {norm:e}")]
    Diverged { outer: usize, inner: usize, norm: f64 },
    #[error("optimal value F* unknown for this problem")]
    UnknownOptimum,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
