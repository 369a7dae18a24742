use ndarray::Array2;

use super::{
    check_alpha, check_dims, draw_minibatch, link_count, AlgorithmError, Executor, NetworkState,
    NodeRngs, Sampling,
};
use crate::graph::MixingMatrix;
use crate::objective::FiniteSumProblem;
use crate::scalar::Scalar;

/// Minibatch stochastic gradients at every node's current state (row `i` = node `i`).
fn minibatch_gradients<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    x: &Array2<T>,
    problem: &P,
    batch: usize,
    sampling: Sampling,
    rngs: &mut NodeRngs,
    exec: &Executor,
) -> Array2<T> {
    let m = problem.components();
    let p = x.ncols();
    let rows = exec.map_nodes(rngs.streams_mut(), |i, rng| {
        let draws = draw_minibatch(rng, m, batch, sampling);
        let xi = x.row(i);
        let xi = xi.as_slice().expect("row-major state");
        let mut g = vec![T::zero(); p];
        let mut acc = vec![T::zero(); p];
        for &j in &draws {
            problem.component_gradient(i, j, xi, &mut g);
            for (a, &v) in acc.iter_mut().zip(&g) {
                *a += v;
            }
        }
        let inv = T::one() / T::from_usize_lossy(draws.len());
        acc.into_iter().map(|a| a * inv).collect::<Vec<T>>()
    });
    let n = rows.len();
    Array2::from_shape_vec((n, p), rows.into_iter().flatten().collect())
        .expect("every node row has p entries")
}

fn draws_per_node(batch: usize, m: usize, sampling: Sampling) -> usize {
    match sampling {
        Sampling::Uniform => batch,
        Sampling::FullPass => m,
    }
}

fn check_batch(batch: usize, m: usize) -> Result<(), AlgorithmError> {
    if batch == 0 || batch > m {
        return Err(AlgorithmError::InvalidBatch { batch, m });
    }
    Ok(())
}

/// `x <- W x - alpha g` with `g` a minibatch stochastic gradient at each node.
/// The gradient used is left in `v`. Costs `n B` component gradients and one round.
#[allow(clippy::too_many_arguments)]
pub fn dsgd_step<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut NetworkState<T>,
    problem: &P,
    weights: &MixingMatrix<T>,
    alpha: T,
    batch: usize,
    sampling: Sampling,
    rngs: &mut NodeRngs,
    exec: &Executor,
) -> Result<(), AlgorithmError> {
    check_dims(state, problem, weights, Some(rngs))?;
    check_alpha(alpha)?;
    let m = problem.components();
    check_batch(batch, m)?;
    let g = minibatch_gradients(&state.x, problem, batch, sampling, rngs, exec);
    let mut x = weights.mix(state.x.view());
    for (xv, &gv) in x.iter_mut().zip(g.iter()) {
        *xv -= alpha * gv;
    }
    state.x_prev = std::mem::replace(&mut state.x, x);
    state.v = g;
    state.inner += 1;
    state.counters.gradients += (state.nodes() * draws_per_node(batch, m, sampling)) as u64;
    state.counters.rounds += 1;
    state.counters.messages += link_count(weights);
    Ok(())
}

/// DSGT start: `g^0` at `x^0` and `y^0 = g^0`. Costs `n B` gradients, no communication.
pub fn dsgt_init<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut NetworkState<T>,
    problem: &P,
    batch: usize,
    sampling: Sampling,
    rngs: &mut NodeRngs,
    exec: &Executor,
) -> Result<(), AlgorithmError> {
    let m = problem.components();
    check_batch(batch, m)?;
    if state.primed {
        return Err(AlgorithmError::Phase {
            op: "dsgt init",
            outer: state.outer,
            inner: state.inner,
            expected: "tracker already initialised",
        });
    }
    let g = minibatch_gradients(&state.x, problem, batch, sampling, rngs, exec);
    state.y = g.clone();
    state.v = g;
    state.primed = true;
    state.counters.gradients += (state.nodes() * draws_per_node(batch, m, sampling)) as u64;
    Ok(())
}

/// One DSGT iteration:
/// `x^{k+1} = W x^k - alpha y^k`, `y^{k+1} = W y^k + g^{k+1} - g^k` with `g^{k+1}`
/// sampled at `x^{k+1}`. Costs `n B` gradients and one round exchanging `x` and `y`.
#[allow(clippy::too_many_arguments)]
pub fn dsgt_step<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut NetworkState<T>,
    problem: &P,
    weights: &MixingMatrix<T>,
    alpha: T,
    batch: usize,
    sampling: Sampling,
    rngs: &mut NodeRngs,
    exec: &Executor,
) -> Result<(), AlgorithmError> {
    check_dims(state, problem, weights, Some(rngs))?;
    check_alpha(alpha)?;
    let m = problem.components();
    check_batch(batch, m)?;
    if !state.primed {
        return Err(AlgorithmError::Phase {
            op: "dsgt step",
            outer: state.outer,
            inner: state.inner,
            expected: "call dsgt_init first",
        });
    }
    let mut x = weights.mix(state.x.view());
    for (xv, &yv) in x.iter_mut().zip(state.y.iter()) {
        *xv -= alpha * yv;
    }
    let g_new = minibatch_gradients(&x, problem, batch, sampling, rngs, exec);
    let mut y = weights.mix(state.y.view());
    for ((yv, &gn), &go) in y.iter_mut().zip(g_new.iter()).zip(state.v.iter()) {
        *yv = *yv + gn - go;
    }
    state.x_prev = std::mem::replace(&mut state.x, x);
    state.y = y;
    state.v = g_new;
    state.inner += 1;
    state.counters.gradients += (state.nodes() * draws_per_node(batch, m, sampling)) as u64;
    state.counters.rounds += 1;
    state.counters.messages += 2 * link_count(weights);
    Ok(())
}
