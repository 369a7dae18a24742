use ndarray::Array2;

use super::AlgorithmError;
use crate::scalar::{norm, Scalar};

/// Cumulative cost of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostCounters {
    /// Component gradient evaluations summed over all nodes.
    pub gradients: u64,
    /// Synchronous communication rounds.
    pub rounds: u64,
    /// Vectors sent over directed links, summed over rounds.
    pub messages: u64,
}

/// Stacked per-node variables: row `i` of each matrix belongs to node `i`.
///
/// `x` is the current state `x^{t,s}`, `x_prev` the state one update earlier, `y` the
/// gradient tracker and `v` the latest local gradient estimator. `v` doubles as
/// `v^{-1,s}` at the start of an outer cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState<T> {
    pub(crate) x: Array2<T>,
    pub(crate) x_prev: Array2<T>,
    pub(crate) y: Array2<T>,
    pub(crate) v: Array2<T>,
    pub(crate) outer: usize,
    pub(crate) inner: usize,
    pub(crate) primed: bool,
    pub(crate) counters: CostCounters,
}

impl<T: Scalar> NetworkState<T> {
    /// Every node starts at `x0`; trackers and estimators start at zero.
    pub fn new(n: usize, x0: &[T]) -> Self {
        let p = x0.len();
        let x = Array2::from_shape_fn((n, p), |(_, d)| x0[d]);
        NetworkState {
            x_prev: x.clone(),
            x,
            y: Array2::zeros((n, p)),
            v: Array2::zeros((n, p)),
            outer: 1,
            inner: 0,
            primed: false,
            counters: CostCounters::default(),
        }
    }

    /// Assembles an arbitrary state, e.g. to resume a run or construct test cases.
    pub fn from_parts(
        x: Array2<T>,
        x_prev: Array2<T>,
        y: Array2<T>,
        v: Array2<T>,
        outer: usize,
        inner: usize,
    ) -> Result<Self, AlgorithmError> {
        let dim = x.dim();
        for (name, m) in [("x_prev", &x_prev), ("y", &y), ("v", &v)] {
            if m.dim() != dim {
                return Err(AlgorithmError::DimensionMismatch(format!(
                    "{name} is {:?}, x is {dim:?}",
                    m.dim()
                )));
            }
        }
        Ok(NetworkState {
            x,
            x_prev,
            y,
            v,
            outer,
            inner,
            primed: true,
            counters: CostCounters::default(),
        })
    }

    pub fn nodes(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<T> {
        &self.x
    }

    pub fn x_prev(&self) -> &Array2<T> {
        &self.x_prev
    }

    pub fn y(&self) -> &Array2<T> {
        &self.y
    }

    pub fn v(&self) -> &Array2<T> {
        &self.v
    }

    /// Outer index `s` (1-based). Baseline runs leave it at 1.
    pub fn outer(&self) -> usize {
        self.outer
    }

    /// Inner index `t` of GT-SARAH, or the step count `k` of a baseline.
    pub fn inner(&self) -> usize {
        self.inner
    }

    pub fn counters(&self) -> CostCounters {
        self.counters
    }

    /// Node average of the states.
    pub fn mean_x(&self) -> Vec<T> {
        column_mean(&self.x)
    }

    pub fn mean_y(&self) -> Vec<T> {
        column_mean(&self.y)
    }

    pub fn mean_v(&self) -> Vec<T> {
        column_mean(&self.v)
    }

    /// `||ybar - vbar|| / (1 + ||vbar||)`; zero up to rounding after every tracked update.
    pub fn tracking_deviation(&self) -> T {
        let y = self.mean_y();
        let v = self.mean_v();
        let diff: Vec<T> = y.iter().zip(&v).map(|(&a, &b)| a - b).collect();
        norm(&diff) / (T::one() + norm(&v))
    }

    /// Frobenius norm of the stacked states.
    pub fn state_norm(&self) -> T {
        self.x.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
    }
}

/// Mean over rows, accumulated in row order.
pub fn column_mean<T: Scalar>(m: &Array2<T>) -> Vec<T> {
    let mut out = vec![T::zero(); m.ncols()];
    for row in m.rows() {
        for (o, &v) in out.iter_mut().zip(row.iter()) {
            *o += v;
        }
    }
    let inv = T::one() / T::from_usize_lossy(m.nrows().max(1));
    for o in &mut out {
        *o *= inv;
    }
    out
}
