use ndarray::Array2;

use super::{
    check_alpha, check_dims, draw_minibatch, link_count, AlgorithmError, Executor, NetworkState,
    NodeRngs, Sampling,
};
use crate::graph::MixingMatrix;
use crate::objective::{batch_gradient_into, FiniteSumProblem};
use crate::scalar::Scalar;

/// Per-run constants of the GT-SARAH recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtSarahParams<T> {
    pub alpha: T,
    pub batch: usize,
    pub q: usize,
    pub sampling: Sampling,
}

/// Tracker and state update shared by both phases of a cycle:
/// `y <- W y + v_new - v_old`, `x <- W x - alpha y`, with `x_prev` taking the old `x`.
pub(crate) fn track_and_descend<T: Scalar>(
    state: &mut NetworkState<T>,
    weights: &MixingMatrix<T>,
    alpha: T,
    v_new: Array2<T>,
) {
    let n = state.nodes();
    let mut y = weights.mix(state.y.view());
    for i in 0..n {
        for ((yv, &vn), &vo) in y
            .row_mut(i)
            .iter_mut()
            .zip(v_new.row(i).iter())
            .zip(state.v.row(i).iter())
        {
            *yv = *yv + vn - vo;
        }
    }
    let mut x = weights.mix(state.x.view());
    for (xv, &yv) in x.iter_mut().zip(y.iter()) {
        *xv -= alpha * yv;
    }
    state.x_prev = std::mem::replace(&mut state.x, x);
    state.y = y;
    state.v = v_new;
}

fn stack_rows<T: Scalar>(rows: Vec<Vec<T>>, p: usize) -> Array2<T> {
    let n = rows.len();
    Array2::from_shape_vec((n, p), rows.into_iter().flatten().collect())
        .expect("every node row has p entries")
}

/// Start of outer cycle `s`: local batch gradients `v^{0,s}`, then one tracking and
/// state update. Costs `n m` component gradients and one round.
pub fn gt_sarah_outer_init<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut NetworkState<T>,
    problem: &P,
    weights: &MixingMatrix<T>,
    params: &GtSarahParams<T>,
    exec: &Executor,
) -> Result<(), AlgorithmError> {
    check_dims(state, problem, weights, None)?;
    check_alpha(params.alpha)?;
    if state.inner != 0 {
        return Err(AlgorithmError::Phase {
            op: "outer init",
            outer: state.outer,
            inner: state.inner,
            expected: "expected t = 0",
        });
    }
    let n = state.nodes();
    let p = state.dim();
    let x = &state.x;
    let mut nodes: Vec<usize> = (0..n).collect();
    let rows = exec.map_nodes(&mut nodes, |i, _| {
        let mut scratch = vec![T::zero(); p];
        let mut g = vec![T::zero(); p];
        let xi = x.row(i);
        batch_gradient_into(problem, i, xi.as_slice().expect("row-major state"), &mut scratch, &mut g);
        g
    });
    let v_new = stack_rows(rows, p);
    track_and_descend(state, weights, params.alpha, v_new);

    state.inner = 1;
    state.counters.gradients += (n * problem.components()) as u64;
    state.counters.rounds += 1;
    state.counters.messages += 2 * link_count(weights);
    Ok(())
}

/// Inner iteration `t` (`1 <= t <= q`): SARAH estimator from `B` sampled components
/// evaluated at `x^t` and `x^{t-1}`, then tracking and state update. Costs `2 n B`
/// component gradients and one round.
pub fn gt_sarah_inner_step<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    state: &mut NetworkState<T>,
    problem: &P,
    weights: &MixingMatrix<T>,
    params: &GtSarahParams<T>,
    rngs: &mut NodeRngs,
    exec: &Executor,
) -> Result<(), AlgorithmError> {
    check_dims(state, problem, weights, Some(rngs))?;
    check_alpha(params.alpha)?;
    let m = problem.components();
    if params.batch == 0 || params.batch > m {
        return Err(AlgorithmError::InvalidBatch {
            batch: params.batch,
            m,
        });
    }
    if state.inner == 0 || state.inner > params.q {
        return Err(AlgorithmError::Phase {
            op: "inner step",
            outer: state.outer,
            inner: state.inner,
            expected: "expected 1 <= t <= q",
        });
    }
    let n = state.nodes();
    let p = state.dim();
    let (x, x_prev, v) = (&state.x, &state.x_prev, &state.v);
    let rows = exec.map_nodes(rngs.streams_mut(), |i, rng| {
        let draws = draw_minibatch(rng, m, params.batch, params.sampling);
        let xi = x.row(i);
        let xpi = x_prev.row(i);
        let (xi, xpi) = (xi.as_slice().expect("row-major"), xpi.as_slice().expect("row-major"));
        let mut g_now = vec![T::zero(); p];
        let mut g_then = vec![T::zero(); p];
        let mut acc = vec![T::zero(); p];
        for &j in &draws {
            problem.component_gradient(i, j, xi, &mut g_now);
            problem.component_gradient(i, j, xpi, &mut g_then);
            for ((a, &u), &w) in acc.iter_mut().zip(&g_now).zip(&g_then) {
                *a += u - w;
            }
        }
        let inv = T::one() / T::from_usize_lossy(draws.len());
        acc.iter()
            .zip(v.row(i).iter())
            .map(|(&a, &vo)| a * inv + vo)
            .collect::<Vec<T>>()
    });
    let draws_per_node = match params.sampling {
        Sampling::Uniform => params.batch,
        Sampling::FullPass => m,
    };
    let v_new = stack_rows(rows, p);
    track_and_descend(state, weights, params.alpha, v_new);

    state.inner += 1;
    state.counters.gradients += (2 * n * draws_per_node) as u64;
    state.counters.rounds += 1;
    state.counters.messages += 2 * link_count(weights);
    Ok(())
}

/// Rolls `(t = q + 1, s)` over to `(t = 0, s + 1)`. The state, tracker and latest
/// estimator carry over unchanged and become `x^{0,s+1}`, `y^{0,s+1}` and `v^{-1,s+1}`.
pub fn gt_sarah_cycle_handoff<T: Scalar>(
    state: &mut NetworkState<T>,
    params: &GtSarahParams<T>,
) -> Result<(), AlgorithmError> {
    if state.inner != params.q + 1 {
        return Err(AlgorithmError::Phase {
            op: "cycle handoff",
            outer: state.outer,
            inner: state.inner,
            expected: "inner loop must reach t = q + 1",
        });
    }
    state.inner = 0;
    state.outer += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_topology, lazy_metropolis_weights, TopologyKind};
    use crate::objective::{batch_gradient, QuadraticProblem};

    fn problem(n: usize) -> QuadraticProblem<f64> {
        let m = 3;
        let p = 2;
        let len = n * m * p;
        let a: Vec<f64> = (0..len).map(|k| 0.5 + (k % 5) as f64 * 0.3).collect();
        let c: Vec<f64> = (0..len).map(|k| (k as f64 * 0.77).sin() * 2.0).collect();
        QuadraticProblem::new(n, m, p, a, c).unwrap()
    }

    fn params(alpha: f64) -> GtSarahParams<f64> {
        GtSarahParams {
            alpha,
            batch: 2,
            q: 3,
            sampling: Sampling::Uniform,
        }
    }

    #[test]
    fn first_init_tracks_batch_gradients() {
        let prob = problem(4);
        let w = lazy_metropolis_weights(&build_topology(TopologyKind::Ring, 4).unwrap()).unwrap();
        let mut st = NetworkState::new(4, &[0.3, -0.2]);
        gt_sarah_outer_init(&mut st, &prob, &w, &params(0.1), &Executor::Sequential).unwrap();
        for i in 0..4 {
            let g = batch_gradient(&prob, i, &[0.3, -0.2]).unwrap();
            assert_eq!(st.v().row(i).to_vec(), g);
            assert_eq!(st.y().row(i).to_vec(), g);
        }
        assert!(st.tracking_deviation() < 1e-15);
        assert_eq!(st.counters().gradients, 12);
        assert_eq!(st.counters().rounds, 1);
        assert_eq!(st.inner(), 1);
    }

    #[test]
    fn single_node_init_is_gradient_step() {
        let prob = problem(1);
        let w = MixingMatrix::identity_single();
        let x0 = [1.0, 2.0];
        let mut st = NetworkState::new(1, &x0);
        gt_sarah_outer_init(&mut st, &prob, &w, &params(0.25), &Executor::Sequential).unwrap();
        let g = batch_gradient(&prob, 0, &x0).unwrap();
        assert_eq!(st.y().row(0).to_vec(), g);
        let expect: Vec<f64> = x0.iter().zip(&g).map(|(x, g)| x - 0.25 * g).collect();
        assert_eq!(st.x().row(0).to_vec(), expect);
    }

    #[test]
    fn zero_step_is_pure_mixing() {
        let prob = problem(3);
        let w = lazy_metropolis_weights(&build_topology(TopologyKind::Path, 3).unwrap()).unwrap();
        let x = Array2::from_shape_vec((3, 2), vec![1.0, 0.0, -1.0, 2.0, 0.5, 0.5]).unwrap();
        let zeros = Array2::zeros((3, 2));
        let mut st =
            NetworkState::from_parts(x.clone(), x.clone(), zeros.clone(), zeros, 1, 0).unwrap();
        gt_sarah_outer_init(&mut st, &prob, &w, &params(0.0), &Executor::Sequential).unwrap();
        assert_eq!(st.x(), &w.mix(x.view()));
    }

    #[test]
    fn frozen_state_keeps_estimator() {
        let prob = problem(1);
        let w = MixingMatrix::identity_single();
        let mut st = NetworkState::new(1, &[0.4, 0.1]);
        let p = params(0.0);
        let mut rngs = NodeRngs::new(5, 1);
        gt_sarah_outer_init(&mut st, &prob, &w, &p, &Executor::Sequential).unwrap();
        let v0 = st.v().clone();
        for _ in 0..p.q {
            gt_sarah_inner_step(&mut st, &prob, &w, &p, &mut rngs, &Executor::Sequential).unwrap();
            assert_eq!(st.v(), &v0);
        }
    }

    #[test]
    fn phase_errors_and_handoff() {
        let prob = problem(2);
        let w = lazy_metropolis_weights(&build_topology(TopologyKind::Path, 2).unwrap()).unwrap();
        let mut st = NetworkState::new(2, &[0.0, 0.0]);
        let p = params(0.1);
        let mut rngs = NodeRngs::new(1, 2);
        let exec = Executor::Sequential;
        assert!(matches!(
            gt_sarah_inner_step(&mut st, &prob, &w, &p, &mut rngs, &exec),
            Err(AlgorithmError::Phase { .. })
        ));
        assert!(gt_sarah_cycle_handoff(&mut st, &p).is_err());
        gt_sarah_outer_init(&mut st, &prob, &w, &p, &exec).unwrap();
        assert!(gt_sarah_outer_init(&mut st, &prob, &w, &p, &exec).is_err());
        for _ in 0..p.q {
            gt_sarah_inner_step(&mut st, &prob, &w, &p, &mut rngs, &exec).unwrap();
        }
        assert!(gt_sarah_inner_step(&mut st, &prob, &w, &p, &mut rngs, &exec).is_err());
        let (x, y, v) = (st.x().clone(), st.y().clone(), st.v().clone());
        let before = st.counters();
        gt_sarah_cycle_handoff(&mut st, &p).unwrap();
        assert_eq!((st.outer(), st.inner()), (2, 0));
        assert_eq!((st.x(), st.y(), st.v()), (&x, &y, &v));
        assert_eq!(st.counters(), before);
        // 2 nodes, m = 3: n m + 2 q n B = 6 + 24
        assert_eq!(before.gradients, 30);
        assert_eq!(before.rounds, 4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let prob = problem(2);
        let w = lazy_metropolis_weights(&build_topology(TopologyKind::Path, 2).unwrap()).unwrap();
        let mut st = NetworkState::new(3, &[0.0, 0.0]);
        assert!(matches!(
            gt_sarah_outer_init(&mut st, &prob, &w, &params(0.1), &Executor::Sequential),
            Err(AlgorithmError::DimensionMismatch(_))
        ));
        let mut st = NetworkState::new(2, &[0.0, 0.0]);
        assert!(matches!(
            gt_sarah_outer_init(&mut st, &prob, &w, &params(-1.0), &Executor::Sequential),
            Err(AlgorithmError::NonPositiveStepSize(_))
        ));
    }
}
