use ndarray::Array2;

use super::EngineError;
use crate::algorithms::column_mean;
use crate::objective::{full_gradient, local_gradients, FiniteSumProblem, ObjectiveError};
use crate::scalar::{dist, norm, norm_sq, Scalar};

/// `(1/n) sum_i ||x_i - xbar||`.
pub fn consensus_error<T: Scalar>(x: &Array2<T>) -> T {
    let mean = column_mean(x);
    let total: T = x
        .rows()
        .into_iter()
        .map(|r| dist(r.as_slice().expect("row-major"), &mean))
        .sum();
    total / T::from_usize_lossy(x.nrows())
}

/// Network stationary gap `||grad F(xbar)|| + (1/n) sum_i ||x_i - xbar||`.
pub fn stationary_gap<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &Array2<T>,
) -> Result<T, ObjectiveError> {
    let mean = column_mean(x);
    let g = full_gradient(problem, &mean)?;
    Ok(norm(&g) + consensus_error(x))
}

/// Per-iterate term of the stationarity criterion:
/// `(1/n) sum_i (||grad F(x_i)||^2 + L^2 ||x_i - xbar||^2)`.
pub fn def33_term<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &Array2<T>,
) -> Result<T, ObjectiveError> {
    let l = problem.smoothness();
    let mean = column_mean(x);
    let mut total = T::zero();
    for row in x.rows() {
        let xi = row.as_slice().expect("row-major");
        let g = full_gradient(problem, xi)?;
        let d = dist(xi, &mean);
        total += norm_sq(&g) + l * l * d * d;
    }
    Ok(total / T::from_usize_lossy(x.nrows()))
}

/// Running mean of [`def33_term`] over a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Def33Accumulator<T> {
    sum: T,
    count: u64,
}

impl<T: Scalar> Def33Accumulator<T> {
    pub fn new() -> Self {
        Def33Accumulator {
            sum: T::zero(),
            count: 0,
        }
    }

    pub fn push(&mut self, term: T) {
        self.sum += term;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// NaN before the first term.
    pub fn mean(&self) -> T {
        if self.count == 0 {
            T::nan()
        } else {
            self.sum / T::from_u64(self.count).expect("count fits in scalar")
        }
    }
}

/// Mean of the per-iterate stationarity terms over the given states. Comparing the
/// result with `epsilon^2` is the success test for an `epsilon`-accurate point.
pub fn def33_metric<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    states: &[Array2<T>],
) -> Result<T, ObjectiveError> {
    let mut acc = Def33Accumulator::new();
    for x in states {
        acc.push(def33_term(problem, x)?);
    }
    Ok(acc.mean())
}

/// Quantities at the common starting point entering the outer-iteration bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions<T> {
    /// `F(x0) - F*`.
    pub objective_gap: T,
    /// `(1/n) sum_i ||grad f_i(x0)||^2`.
    pub local_gradient_sq_mean: T,
}

impl<T: Scalar> InitialConditions<T> {
    /// Evaluates both quantities; requires a known optimal value.
    pub fn at<P: FiniteSumProblem<T> + ?Sized>(problem: &P, x0: &[T]) -> Result<Self, EngineError> {
        let f_star = problem.optimal_value().ok_or(EngineError::UnknownOptimum)?;
        Self::with_optimum(problem, x0, f_star)
    }

    /// Same as [`InitialConditions::at`] with a caller-supplied `F*`.
    pub fn with_optimum<P: FiniteSumProblem<T> + ?Sized>(
        problem: &P,
        x0: &[T],
        f_star: T,
    ) -> Result<Self, EngineError> {
        let f0 = crate::objective::objective_value(problem, x0)?;
        let locals = local_gradients(problem, x0)?;
        let sq: T = locals.iter().map(|g| norm_sq(g)).sum();
        Ok(InitialConditions {
            objective_gap: f0 - f_star,
            local_gradient_sq_mean: sq / T::from_usize_lossy(problem.nodes()),
        })
    }

    /// `L (F(x0) - F*) + (1/n) sum_i ||grad f_i(x0)||^2`.
    pub fn delta(&self, l: T) -> T {
        l * self.objective_gap + self.local_gradient_sq_mean
    }
}

/// Outer cycles sufficient for an `epsilon`-accurate stationary point:
/// `ceil((4 L (F(x0) - F*) + (1/n) sum ||grad f_i(x0)||^2) / ((q + 1) alpha L epsilon^2))`.
pub fn outer_iteration_bound<T: Scalar>(
    init: &InitialConditions<T>,
    alpha: T,
    q: usize,
    epsilon: T,
    l: T,
) -> Result<u64, EngineError> {
    if !(alpha > T::zero() && epsilon > T::zero() && l > T::zero()) || q == 0 {
        return Err(EngineError::InvalidArgument(
            "alpha, epsilon, L and q must be positive".into(),
        ));
    }
    let value = outer_iteration_bound_value(init, alpha, q, epsilon, l);
    value
        .ceil()
        .to_u64()
        .ok_or_else(|| EngineError::InvalidArgument(format!("bound {value:e} out of range")))
}

/// Unrounded form of [`outer_iteration_bound`].
pub fn outer_iteration_bound_value<T: Scalar>(
    init: &InitialConditions<T>,
    alpha: T,
    q: usize,
    epsilon: T,
    l: T,
) -> T {
    let numer = T::lit(4.0) * l * init.objective_gap + init.local_gradient_sq_mean;
    numer / (T::from_usize_lossy(q + 1) * alpha * l * epsilon * epsilon)
}
