//! Finite-sum objectives `F(x) = (1/n) sum_i f_i(x)`, `f_i = (1/m) sum_j f_{i,j}`, and
//! the gradient oracles the algorithms consume.

mod logistic;
mod quadratic;

pub use logistic::{sigmoid, softplus, LogisticDataset};
pub use quadratic::QuadraticProblem;

use thiserror::Error;

use crate::scalar::{norm_sq, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("node {node} out of range ({n} nodes)")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("component {component} out of range ({m} components per node)")]
    ComponentOutOfRange { component: usize, m: usize },
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {value} at sample ({node}, {component}) is not +1 or -1")]
    InvalidLabel { node: usize, component: usize, value: f64 },
    #[error("feature ({node}, {component}) has norm {norm}, expected 1")]
    NotUnitNorm { node: usize, component: usize, norm: f64 },
    #[error("{0}")]
    Shape(String),
}

/// A decentralized finite sum: `n` nodes holding `m` components each over `R^p`.
///
/// Index arguments of the oracle methods are preconditions; the free functions in this
/// module validate them and return [`ObjectiveError`] instead.
pub trait FiniteSumProblem<T: Scalar>: Sync {
    fn nodes(&self) -> usize;
    fn components(&self) -> usize;
    fn dim(&self) -> usize;

    /// `f_{i,j}(x)`.
    fn component_value(&self, node: usize, component: usize, x: &[T]) -> T;

    /// Writes `grad f_{i,j}(x)` into `out`.
    fn component_gradient(&self, node: usize, component: usize, x: &[T], out: &mut [T]);

    /// Mean-squared smoothness constant `L`.
    fn smoothness(&self) -> T;

    /// `inf F`, when known in closed form.
    fn optimal_value(&self) -> Option<T> {
        None
    }

    /// Total number of components `N = n m`.
    fn total_components(&self) -> usize {
        self.nodes() * self.components()
    }
}

pub fn check_node<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    node: usize,
) -> Result<(), ObjectiveError> {
    if node >= problem.nodes() {
        return Err(ObjectiveError::NodeOutOfRange {
            node,
            n: problem.nodes(),
        });
    }
    Ok(())
}

pub fn check_point<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
) -> Result<(), ObjectiveError> {
    if x.len() != problem.dim() {
        return Err(ObjectiveError::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

pub fn check_component<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    node: usize,
    component: usize,
) -> Result<(), ObjectiveError> {
    check_node(problem, node)?;
    if component >= problem.components() {
        return Err(ObjectiveError::ComponentOutOfRange {
            component,
            m: problem.components(),
        });
    }
    Ok(())
}

/// `grad f_i(x) = (1/m) sum_j grad f_{i,j}(x)`, summed in component order.
/// `scratch` and `out` must have length `p`.
pub fn batch_gradient_into<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    node: usize,
    x: &[T],
    scratch: &mut [T],
    out: &mut [T],
) {
    out.fill(T::zero());
    for j in 0..problem.components() {
        problem.component_gradient(node, j, x, scratch);
        for (o, &g) in out.iter_mut().zip(scratch.iter()) {
            *o += g;
        }
    }
    let inv = T::one() / T::from_usize_lossy(problem.components());
    for o in out.iter_mut() {
        *o *= inv;
    }
}

/// Local batch gradient at node `node`.
pub fn batch_gradient<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    node: usize,
    x: &[T],
) -> Result<Vec<T>, ObjectiveError> {
    check_node(problem, node)?;
    check_point(problem, x)?;
    let p = problem.dim();
    let mut scratch = vec![T::zero(); p];
    let mut out = vec![T::zero(); p];
    batch_gradient_into(problem, node, x, &mut scratch, &mut out);
    Ok(out)
}

/// Local batch gradients of every node evaluated at the same point (row `i` = node `i`).
pub fn local_gradients<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
) -> Result<Vec<Vec<T>>, ObjectiveError> {
    check_point(problem, x)?;
    let p = problem.dim();
    let mut scratch = vec![T::zero(); p];
    Ok((0..problem.nodes())
        .map(|i| {
            let mut g = vec![T::zero(); p];
            batch_gradient_into(problem, i, x, &mut scratch, &mut g);
            g
        })
        .collect())
}

/// `grad F(x)`: mean of the local batch gradients over all nodes.
pub fn full_gradient<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
) -> Result<Vec<T>, ObjectiveError> {
    let locals = local_gradients(problem, x)?;
    Ok(mean_rows(&locals, problem.dim()))
}

/// `F(x)`.
pub fn objective_value<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
) -> Result<T, ObjectiveError> {
    check_point(problem, x)?;
    let mut total = T::zero();
    for i in 0..problem.nodes() {
        let mut local = T::zero();
        for j in 0..problem.components() {
            local += problem.component_value(i, j, x);
        }
        total += local / T::from_usize_lossy(problem.components());
    }
    Ok(total / T::from_usize_lossy(problem.nodes()))
}

/// Pointwise gradient dissimilarity `(1/n) sum_i ||grad f_i(x) - grad F(x)||^2`.
pub fn dissimilarity_at<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    x: &[T],
) -> Result<T, ObjectiveError> {
    let locals = local_gradients(problem, x)?;
    let global = mean_rows(&locals, problem.dim());
    let total: T = locals
        .iter()
        .map(|g| {
            let diff: Vec<T> = g.iter().zip(&global).map(|(&a, &b)| a - b).collect();
            norm_sq(&diff)
        })
        .sum();
    Ok(total / T::from_usize_lossy(problem.nodes()))
}

/// Mean-squared smoothness ratio at node `node` for the pair `(x, y)`:
/// `(1/m) sum_j ||grad f_{i,j}(x) - grad f_{i,j}(y)||^2 / ||x - y||^2`. Bounded by `L^2`.
pub fn smoothness_ratio<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(
    problem: &P,
    node: usize,
    x: &[T],
    y: &[T],
) -> Result<T, ObjectiveError> {
    check_node(problem, node)?;
    check_point(problem, x)?;
    check_point(problem, y)?;
    let p = problem.dim();
    let mut gx = vec![T::zero(); p];
    let mut gy = vec![T::zero(); p];
    let mut acc = T::zero();
    for j in 0..problem.components() {
        problem.component_gradient(node, j, x, &mut gx);
        problem.component_gradient(node, j, y, &mut gy);
        acc += gx
            .iter()
            .zip(&gy)
            .fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b));
    }
    let mean = acc / T::from_usize_lossy(problem.components());
    let d: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
    Ok(mean / norm_sq(&d))
}

/// Smoothness constant `L` of a problem.
pub fn estimate_smoothness<T: Scalar, P: FiniteSumProblem<T> + ?Sized>(problem: &P) -> T {
    problem.smoothness()
}

pub(crate) fn mean_rows<T: Scalar>(rows: &[Vec<T>], p: usize) -> Vec<T> {
    let mut out = vec![T::zero(); p];
    for r in rows {
        for (o, &v) in out.iter_mut().zip(r) {
            *o += v;
        }
    }
    let inv = T::one() / T::from_usize_lossy(rows.len().max(1));
    for o in &mut out {
        *o *= inv;
    }
    out
}
