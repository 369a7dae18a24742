use super::{FiniteSumProblem, ObjectiveError};
use crate::scalar::Scalar;

/// Separable quadratic components
/// `f_{i,j}(x) = 1/2 sum_d a_{ij,d} (x_d - c_{ij,d})^2` with `a >= 0`.
///
/// Hessians are diagonal, so the minimizer and `F*` are available in closed form and
/// `L` is the largest curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem<T> {
    n: usize,
    m: usize,
    p: usize,
    curvature: Vec<T>,
    center: Vec<T>,
}

impl<T: Scalar> QuadraticProblem<T> {
    /// `curvature` and `center` are node-major `n m p` arrays.
    pub fn new(
        n: usize,
        m: usize,
        p: usize,
        curvature: Vec<T>,
        center: Vec<T>,
    ) -> Result<Self, ObjectiveError> {
        if n == 0 || m == 0 || p == 0 {
            return Err(ObjectiveError::Shape(format!(
                "n, m and p must be positive (got {n}, {m}, {p})"
            )));
        }
        let len = n * m * p;
        if curvature.len() != len || center.len() != len {
            return Err(ObjectiveError::Shape(format!(
                "expected {len} curvature and center values, got {} and {}",
                curvature.len(),
                center.len()
            )));
        }
        if curvature.iter().any(|&a| !(a >= T::zero()) || !a.is_finite()) {
            return Err(ObjectiveError::Shape("curvatures must be finite and >= 0".into()));
        }
        if !curvature.iter().any(|&a| a > T::zero()) {
            return Err(ObjectiveError::Shape("at least one curvature must be positive".into()));
        }
        Ok(QuadraticProblem {
            n,
            m,
            p,
            curvature,
            center,
        })
    }

    fn offset(&self, node: usize, component: usize) -> usize {
        (node * self.m + component) * self.p
    }

    pub fn curvature(&self, node: usize, component: usize) -> &[T] {
        let o = self.offset(node, component);
        &self.curvature[o..o + self.p]
    }

    pub fn center(&self, node: usize, component: usize) -> &[T] {
        let o = self.offset(node, component);
        &self.center[o..o + self.p]
    }

    /// Curvature-weighted mean of all centers; coordinates with no curvature are 0.
    pub fn minimizer(&self) -> Vec<T> {
        let mut num = vec![T::zero(); self.p];
        let mut den = vec![T::zero(); self.p];
        for k in 0..self.n * self.m {
            let o = k * self.p;
            for d in 0..self.p {
                num[d] += self.curvature[o + d] * self.center[o + d];
                den[d] += self.curvature[o + d];
            }
        }
        num.iter()
            .zip(&den)
            .map(|(&a, &b)| if b > T::zero() { a / b } else { T::zero() })
            .collect()
    }
}

impl<T: Scalar> FiniteSumProblem<T> for QuadraticProblem<T> {
    fn nodes(&self) -> usize {
        self.n
    }

    fn components(&self) -> usize {
        self.m
    }

    fn dim(&self) -> usize {
        self.p
    }

    fn component_value(&self, node: usize, component: usize, x: &[T]) -> T {
        let half = T::lit(0.5);
        self.curvature(node, component)
            .iter()
            .zip(self.center(node, component))
            .zip(x)
            .map(|((&a, &c), &v)| half * a * (v - c) * (v - c))
            .sum()
    }

    fn component_gradient(&self, node: usize, component: usize, x: &[T], out: &mut [T]) {
        let a = self.curvature(node, component);
        let c = self.center(node, component);
        for d in 0..self.p {
            out[d] = a[d] * (x[d] - c[d]);
        }
    }

    /// Largest eigenvalue over all component Hessians.
    fn smoothness(&self) -> T {
        self.curvature.iter().fold(T::zero(), |acc, &a| acc.max(a))
    }

    fn optimal_value(&self) -> Option<T> {
        super::objective_value(self, &self.minimizer()).ok()
    }
}
