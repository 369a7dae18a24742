use rayon::prelude::*;

use super::metrics::{consensus_error, def33_term, stationary_gap, Def33Accumulator};
use super::trace::{RunRecord, RunTrace};
use super::{EngineError, DIVERGENCE_THRESHOLD};
use crate::algorithms::{
    derive_seed, dsgd_step, dsgt_init, dsgt_step, gt_sarah_cycle_handoff, gt_sarah_inner_step,
    gt_sarah_outer_init, Algorithm, Executor, GtSarahParams, NetworkState, NodeRngs, RunConfig,
};
use crate::graph::MixingMatrix;
use crate::objective::{objective_value, FiniteSumProblem};
use crate::scalar::Scalar;

/// Which iterates feed the stationarity running mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Def33Mode {
    Off,
    /// Only the recorded points.
    #[default]
    Recorded,
    /// Every iterate `x^{t,s}`, `t = 0..q`, `s = 1..S` (every step `k` for baselines).
    /// Costs `n` full gradients per iterate.
    EveryIterate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions<T> {
    /// Record every this many inner steps. Defaults to `ceil((q+1)/4)` for GT-SARAH
    /// and a quarter epoch, `ceil(m/(4B))`, for the baselines.
    pub record_every: Option<usize>,
    pub def33: Def33Mode,
    /// Worker threads for per-node work; results do not depend on it.
    pub threads: usize,
    /// Common starting point; zero when absent.
    pub x0: Option<Vec<T>>,
}

impl<T> Default for RunOptions<T> {
    fn default() -> Self {
        RunOptions {
            record_every: None,
            def33: Def33Mode::default(),
            threads: 1,
            x0: None,
        }
    }
}

struct Recorder<'a, T, P: ?Sized> {
    problem: &'a P,
    mode: Def33Mode,
    acc: Def33Accumulator<T>,
    records: Vec<RunRecord<T>>,
    max_dev: T,
}

impl<'a, T: Scalar, P: FiniteSumProblem<T> + ?Sized> Recorder<'a, T, P> {
    fn record(&mut self, state: &NetworkState<T>, s: usize, t: usize) -> Result<(), EngineError> {
        if self.mode == Def33Mode::Recorded {
            self.acc.push(def33_term(self.problem, state.x())?);
        }
        let c = state.counters();
        let x = state.x();
        let mean = state.mean_x();
        let nm = T::from_usize_lossy(self.problem.nodes() * self.problem.components());
        self.records.push(RunRecord {
            s,
            t,
            epochs: T::from_u64(c.gradients).expect("count fits in scalar") / nm,
            grads_total: c.gradients,
            comm_rounds: c.rounds,
            stationary_gap: stationary_gap(self.problem, x)?,
            consensus_error: consensus_error(x),
            objective: objective_value(self.problem, &mean)?,
            def33_mean: self.acc.mean(),
        });
        Ok(())
    }

    fn iterate(&mut self, state: &NetworkState<T>) -> Result<(), EngineError> {
        if self.mode == Def33Mode::EveryIterate {
            self.acc.push(def33_term(self.problem, state.x())?);
        }
        Ok(())
    }

    fn after_update(&mut self, state: &NetworkState<T>, tracked: bool) -> Result<(), EngineError> {
        let norm = state.state_norm();
        if !norm.is_finite() || norm.to_f64_lossy() > DIVERGENCE_THRESHOLD {
            log::warn!(
                "divergence guard tripped at s={} t={} (norm {:e})",
                state.outer(),
                state.inner(),
                norm
            );
            return Err(EngineError::Diverged {
                outer: state.outer(),
                inner: state.inner(),
                norm: norm.to_f64_lossy(),
            });
        }
        if tracked {
            let d = state.tracking_deviation();
            if d > self.max_dev {
                self.max_dev = d;
            }
        }
        Ok(())
    }
}

/// Runs one algorithm from a common starting point and records its trace.
pub fn run<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    weights: &MixingMatrix<T>,
    config: &RunConfig<T>,
    options: &RunOptions<T>,
) -> Result<RunTrace<T>, EngineError> {
    let n = problem.nodes();
    let m = problem.components();
    let p = problem.dim();
    if weights.n() != n {
        return Err(EngineError::InvalidArgument(format!(
            "weights are {0}x{0}, problem has {n} nodes",
            weights.n()
        )));
    }
    config.validate(m)?;
    let x0 = match &options.x0 {
        Some(x0) if x0.len() != p => {
            return Err(EngineError::InvalidArgument(format!(
                "x0 has length {}, problem dimension is {p}",
                x0.len()
            )))
        }
        Some(x0) => x0.clone(),
        None => vec![T::zero(); p],
    };
    let alpha = config.resolve_alpha(n, weights.lambda(), problem.smoothness())?;
    let exec = Executor::with_threads(options.threads)?;
    let mut state = NetworkState::new(n, &x0);
    let mut rngs = NodeRngs::new(config.seed, n);
    let mut rec = Recorder {
        problem,
        mode: options.def33,
        acc: Def33Accumulator::new(),
        records: Vec::new(),
        max_dev: T::zero(),
    };

    match config.algorithm {
        Algorithm::GtSarah => {
            let params = GtSarahParams {
                alpha,
                batch: config.batch,
                q: config.q,
                sampling: config.sampling,
            };
            let q = config.q;
            let cadence = options.record_every.unwrap_or((q + 1).div_ceil(4)).max(1);
            rec.record(&state, 1, 0)?;
            for s in 1..=config.outer {
                rec.iterate(&state)?;
                gt_sarah_outer_init(&mut state, problem, weights, &params, &exec)?;
                rec.after_update(&state, true)?;
                if cadence == 1 {
                    rec.record(&state, s, 1)?;
                }
                for _ in 0..q {
                    rec.iterate(&state)?;
                    gt_sarah_inner_step(&mut state, problem, weights, &params, &mut rngs, &exec)?;
                    rec.after_update(&state, true)?;
                    let t = state.inner();
                    if t % cadence == 0 || t == q + 1 {
                        rec.record(&state, s, t)?;
                    }
                }
                gt_sarah_cycle_handoff(&mut state, &params)?;
            }
        }
        Algorithm::Dsgd | Algorithm::Dsgt => {
            let steps = config.baseline_steps();
            let cadence = options.record_every.unwrap_or(m.div_ceil(4 * config.batch)).max(1);
            let tracked = config.algorithm == Algorithm::Dsgt;
            if tracked {
                dsgt_init(&mut state, problem, config.batch, config.sampling, &mut rngs, &exec)?;
            }
            rec.record(&state, 0, 0)?;
            for k in 1..=steps {
                rec.iterate(&state)?;
                if tracked {
                    dsgt_step(&mut state, problem, weights, alpha, config.batch, config.sampling, &mut rngs, &exec)?;
                } else {
                    dsgd_step(&mut state, problem, weights, alpha, config.batch, config.sampling, &mut rngs, &exec)?;
                }
                rec.after_update(&state, tracked)?;
                if k % cadence == 0 || k == steps {
                    rec.record(&state, 0, k)?;
                }
            }
        }
    }

    Ok(RunTrace {
        algorithm: config.algorithm,
        seed: config.seed,
        alpha,
        def33_mean: rec.acc.mean(),
        def33_terms: rec.acc.count(),
        records: rec.records,
        counters: state.counters(),
        max_tracking_deviation: rec.max_dev,
        final_x: state.x().clone(),
    })
}

/// Independent replicates with seeds `derive_seed(config.seed, r)`, run concurrently.
/// Results are in replicate order.
pub fn run_replicates<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    weights: &MixingMatrix<T>,
    config: &RunConfig<T>,
    options: &RunOptions<T>,
    replicates: usize,
) -> Result<Vec<RunTrace<T>>, EngineError> {
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut c = config.clone();
            c.seed = derive_seed(config.seed, r as u64);
            run(problem, weights, &c, options)
        })
        .collect()
}

/// Sets `S` (GT-SARAH) or `K` (baselines) to the largest value whose cost stays within
/// `epochs` passes over the local data, counting `m + 2qB` per node per outer cycle,
/// `B` per baseline step and `B` for the DSGT start. At least one iteration is kept.
pub fn epoch_budget<T: Scalar>(config: &RunConfig<T>, m: usize, epochs: f64) -> RunConfig<T> {
    let mut c = config.clone();
    let budget = (epochs * m as f64).floor().max(0.0) as usize;
    let b = match c.sampling {
        crate::algorithms::Sampling::Uniform => c.batch,
        crate::algorithms::Sampling::FullPass => m,
    };
    match c.algorithm {
        Algorithm::GtSarah => c.outer = (budget / (m + 2 * c.q * b)).max(1),
        Algorithm::Dsgd => c.steps = Some((budget / b).max(1)),
        Algorithm::Dsgt => c.steps = Some((budget / b).saturating_sub(1).max(1)),
    }
    c
}
