//! Update rules of GT-SARAH and the DSGD/DSGT baselines, plus the theoretical
//! parameter calculators.

mod baselines;
mod config;
mod gt_sarah;
mod rng;
mod state;
mod theory;

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use baselines::{dsgd_step, dsgt_init, dsgt_step};
pub use config::{Algorithm, RunConfig, Sampling, StepSize};
pub use gt_sarah::{gt_sarah_cycle_handoff, gt_sarah_inner_step, gt_sarah_outer_init, GtSarahParams};
pub use rng::{derive_seed, mix64, node_rng, NodeRngs};
pub use state::{column_mean, CostCounters, NetworkState};
pub use theory::{
    classify_regime, communication_batch_threshold, gradient_batch_threshold, max_stepsize,
    predicted_complexity, recommend_parameters, stepsize_terms, BatchGoal, ComplexityEstimate,
    Recommendation, Regime, StepSizeBound,
};

use crate::graph::MixingMatrix;
use crate::objective::FiniteSumProblem;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgorithmError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("step size must be positive and finite, got {0}")]
    NonPositiveStepSize(f64),
    #[error("smoothness constant must be positive, got {0}")]
    NonPositiveSmoothness(f64),
    #[error("lambda must lie in [0, 1), got {0}")]
    LambdaOutOfRange(f64),
    #[error("minibatch size {batch} outside [1, {m}]")]
    InvalidBatch { batch: usize, m: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{op} called at (s={outer}, t={inner}); {expected}")]
    Phase {
        op: &'static str,
        outer: usize,
        inner: usize,
        expected: &'static str,
    },
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
}

/// Runs the per-node work of a round either inline or on a rayon pool. Each node's
/// result depends only on its own inputs and stream, so both paths agree bitwise.
#[derive(Clone, Default)]
pub enum Executor {
    #[default]
    Sequential,
    Pool(Arc<rayon::ThreadPool>),
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Executor::Sequential => write!(f, "Sequential"),
            Executor::Pool(p) => write!(f, "Pool({} threads)", p.current_num_threads()),
        }
    }
}

impl Executor {
    /// `threads <= 1` runs inline.
    pub fn with_threads(threads: usize) -> Result<Self, AlgorithmError> {
        if threads <= 1 {
            return Ok(Executor::Sequential);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| AlgorithmError::ThreadPool(e.to_string()))?;
        Ok(Executor::Pool(Arc::new(pool)))
    }

    pub(crate) fn map_nodes<S, R, F>(&self, items: &mut [S], f: F) -> Vec<R>
    where
        S: Send,
        R: Send,
        F: Fn(usize, &mut S) -> R + Sync + Send,
    {
        match self {
            Executor::Sequential => items.iter_mut().enumerate().map(|(i, s)| f(i, s)).collect(),
            Executor::Pool(pool) => pool.install(|| {
                items
                    .par_iter_mut()
                    .enumerate()
                    .map(|(i, s)| f(i, s))
                    .collect()
            }),
        }
    }
}

pub(crate) fn check_dims<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &NetworkState<T>,
    problem: &P,
    weights: &MixingMatrix<T>,
    rngs: Option<&NodeRngs>,
) -> Result<(), AlgorithmError> {
    let n = state.nodes();
    if problem.nodes() != n || weights.n() != n {
        return Err(AlgorithmError::DimensionMismatch(format!(
            "state has {n} nodes, problem {}, weights {}",
            problem.nodes(),
            weights.n()
        )));
    }
    if problem.dim() != state.dim() {
        return Err(AlgorithmError::DimensionMismatch(format!(
            "state dimension {}, problem dimension {}",
            state.dim(),
            problem.dim()
        )));
    }
    if let Some(r) = rngs {
        if r.len() != n {
            return Err(AlgorithmError::DimensionMismatch(format!(
                "{} sampling streams for {n} nodes",
                r.len()
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_alpha<T: Scalar>(alpha: T) -> Result<(), AlgorithmError> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(AlgorithmError::NonPositiveStepSize(alpha.to_f64_lossy()));
    }
    Ok(())
}

/// Component indices of one minibatch at one node.
pub(crate) fn draw_minibatch(rng: &mut ChaCha12Rng, m: usize, batch: usize, sampling: Sampling) -> Vec<usize> {
    match sampling {
        Sampling::Uniform => (0..batch).map(|_| rng.gen_range(0..m)).collect(),
        Sampling::FullPass => (0..m).collect(),
    }
}

/// Vectors crossing the network when every node sends one vector to each neighbour.
pub(crate) fn link_count<T: Scalar>(weights: &MixingMatrix<T>) -> u64 {
    (0..weights.n())
        .map(|i| weights.row_support(i).iter().filter(|(r, _)| *r != i).count() as u64)
        .sum()
}
