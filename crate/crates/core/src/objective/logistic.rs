use super::{check_component, check_point, FiniteSumProblem, ObjectiveError};
use crate::scalar::{dot, norm, Scalar};

/// `log(1 + e^z)` without overflow: `max(z, 0) + log1p(e^{-|z|})`.
#[inline]
pub fn softplus<T: Scalar>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

/// Logistic sigmoid, evaluated on the branch that cannot overflow.
#[inline]
pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Binary classification data partitioned over `n` nodes, `m` unit-norm samples each,
/// with the non-convex logistic objective
/// `f_{i,j}(x) = log(1 + exp(-(x^T theta_ij) xi_ij)) + R sum_d x_d^2 / (1 + x_d^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticDataset<T> {
    n: usize,
    m: usize,
    p: usize,
    /// Node-major: sample `(i, j)` occupies `[(i m + j) p, (i m + j + 1) p)`.
    features: Vec<T>,
    labels: Vec<T>,
    reg: T,
    smoothness_override: Option<T>,
}

impl<T: Scalar> LogisticDataset<T> {
    /// Builds a dataset from node-major features and labels. Features must already be
    /// unit-norm and labels exactly `±1`.
    pub fn new(
        n: usize,
        m: usize,
        p: usize,
        features: Vec<T>,
        labels: Vec<T>,
        reg: T,
    ) -> Result<Self, ObjectiveError> {
        if n == 0 || m == 0 || p == 0 {
            return Err(ObjectiveError::Shape(format!(
                "n, m and p must be positive (got {n}, {m}, {p})"
            )));
        }
        if features.len() != n * m * p || labels.len() != n * m {
            return Err(ObjectiveError::Shape(format!(
                "expected {} feature values and {} labels, got {} and {}",
                n * m * p,
                n * m,
                features.len(),
                labels.len()
            )));
        }
        if !(reg >= T::zero()) {
            return Err(ObjectiveError::Shape("regularization weight must be >= 0".into()));
        }
        let tol = T::stochastic_tolerance();
        for k in 0..n * m {
            let (node, component) = (k / m, k % m);
            let label = labels[k];
            if label != T::one() && label != -T::one() {
                return Err(ObjectiveError::InvalidLabel {
                    node,
                    component,
                    value: label.to_f64_lossy(),
                });
            }
            let nrm = norm(&features[k * p..(k + 1) * p]);
            if (nrm - T::one()).abs() > tol {
                return Err(ObjectiveError::NotUnitNorm {
                    node,
                    component,
                    norm: nrm.to_f64_lossy(),
                });
            }
        }
        Ok(LogisticDataset {
            n,
            m,
            p,
            features,
            labels,
            reg,
            smoothness_override: None,
        })
    }

    /// Replaces the closed-form `L = 1/4 + 2R` with a caller-supplied constant.
    pub fn with_smoothness(mut self, l: T) -> Self {
        self.smoothness_override = Some(l);
        self
    }

    pub fn feature(&self, node: usize, component: usize) -> &[T] {
        let k = node * self.m + component;
        &self.features[k * self.p..(k + 1) * self.p]
    }

    pub fn label(&self, node: usize, component: usize) -> T {
        self.labels[node * self.m + component]
    }

    pub fn regularization(&self) -> T {
        self.reg
    }

    /// `r(x) = R sum_d x_d^2 / (1 + x_d^2)`.
    pub fn regularizer(&self, x: &[T]) -> T {
        self.reg
            * x.iter()
                .map(|&v| {
                    let s = v * v;
                    s / (T::one() + s)
                })
                .sum::<T>()
    }

    /// Checked component value `f_{i,j}(x) + r(x)`.
    pub fn logistic_component_value(
        &self,
        node: usize,
        component: usize,
        x: &[T],
    ) -> Result<T, ObjectiveError> {
        check_component(self, node, component)?;
        check_point(self, x)?;
        Ok(self.component_value(node, component, x))
    }

    /// Checked component gradient.
    pub fn logistic_component_gradient(
        &self,
        node: usize,
        component: usize,
        x: &[T],
    ) -> Result<Vec<T>, ObjectiveError> {
        check_component(self, node, component)?;
        check_point(self, x)?;
        let mut out = vec![T::zero(); self.p];
        self.component_gradient(node, component, x, &mut out);
        Ok(out)
    }
}

impl<T: Scalar> FiniteSumProblem<T> for LogisticDataset<T> {
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
        let theta = self.feature(node, component);
        let margin = dot(x, theta) * self.label(node, component);
        softplus(-margin) + self.regularizer(x)
    }

    fn component_gradient(&self, node: usize, component: usize, x: &[T], out: &mut [T]) {
        let theta = self.feature(node, component);
        let xi = self.label(node, component);
        let margin = dot(x, theta) * xi;
        let scale = -xi * sigmoid(-margin);
        let two_r = T::lit(2.0) * self.reg;
        for ((o, &t), &v) in out.iter_mut().zip(theta).zip(x) {
            let d = T::one() + v * v;
            *o = scale * t + two_r * v / (d * d);
        }
    }

    /// `1/4 + 2R`: logistic curvature is at most `||theta||^2 / 4 = 1/4` and the
    /// regularizer's second derivative peaks at the origin with value `2R`.
    fn smoothness(&self) -> T {
        self.smoothness_override
            .unwrap_or_else(|| T::lit(0.25) + T::lit(2.0) * self.reg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::smoothness_ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(theta: f64, label: f64, reg: f64) -> LogisticDataset<f64> {
        LogisticDataset::new(1, 1, 1, vec![theta], vec![label], reg).unwrap()
    }

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> LogisticDataset<f64> {
        let mut features = Vec::with_capacity(n * m * p);
        let mut labels = Vec::with_capacity(n * m);
        for _ in 0..n * m {
            let v: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nrm = norm(&v);
            features.extend(v.iter().map(|a| a / nrm));
            labels.push(if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
        }
        LogisticDataset::new(n, m, p, features, labels, 1e-3).unwrap()
    }

    #[test]
    fn value_at_origin_is_log_two() {
        let d = single(1.0, -1.0, 0.1);
        let v = d.logistic_component_value(0, 0, &[0.0]).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_value() {
        let d = single(1.0, 1.0, 0.001);
        let v = d.logistic_component_value(0, 0, &[1.0]).unwrap();
        // log(1 + e^-1) + 0.001 * 1/2
        let expect = (1.0 + (-1.0f64).exp()).ln() + 0.0005;
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.313762).abs() < 1e-6);
    }

    #[test]
    fn large_margin_limit() {
        let d = single(1.0, 1.0, 0.0);
        let v = d.logistic_component_value(0, 0, &[700.0]).unwrap();
        assert!(v >= 0.0 && v < 1e-300);
        let v = d.logistic_component_value(0, 0, &[-700.0]).unwrap();
        assert!((v - 700.0).abs() < 1e-9);
        assert!(d.logistic_component_value(0, 0, &[-1e5]).unwrap().is_finite());
    }

    #[test]
    fn gradient_at_origin() {
        let theta = [0.6, 0.8];
        let d = LogisticDataset::new(1, 1, 2, theta.to_vec(), vec![-1.0], 0.5).unwrap();
        let g = d.logistic_component_gradient(0, 0, &[0.0, 0.0]).unwrap();
        assert!((g[0] - 0.3f64).abs() < 1e-15 && (g[1] - 0.4f64).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_gradient() {
        let d = single(1.0, 1.0, 0.0);
        let g = d.logistic_component_gradient(0, 0, &[1.0]).unwrap();
        let expect = -1.0 / (1.0 + std::f64::consts::E);
        assert!((g[0] - expect).abs() < 1e-15);
        assert!((g[0] + 0.268941).abs() < 1e-6);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let d = random_dataset(&mut rng, 3, 5, 4);
        let h = 1e-5;
        for _ in 0..50 {
            let i = rng.gen_range(0..3);
            let j = rng.gen_range(0..5);
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let g = d.logistic_component_gradient(i, j, &x).unwrap();
            let fd: Vec<f64> = (0..4)
                .map(|k| {
                    let mut a = x.clone();
                    let mut b = x.clone();
                    a[k] += h;
                    b[k] -= h;
                    (d.component_value(i, j, &a) - d.component_value(i, j, &b)) / (2.0 * h)
                })
                .collect();
            let err: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
            assert!(norm(&err) <= 1e-6 * norm(&g).max(1e-12), "{g:?} vs {fd:?}");
        }
    }

    #[test]
    fn smoothness_closed_form() {
        assert_eq!(single(1.0, 1.0, 0.0).smoothness(), 0.25);
        assert!((single(1.0, 1.0, 0.001).smoothness() - 0.252).abs() < 1e-15);
        assert_eq!(single(1.0, 1.0, 0.0).with_smoothness(2.0).smoothness(), 2.0);
    }

    #[test]
    fn smoothness_bound_holds_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_dataset(&mut rng, 2, 8, 3);
        let l = d.smoothness();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let node = rng.gen_range(0..2);
            assert!(smoothness_ratio(&d, node, &x, &y).unwrap() <= l * l);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            LogisticDataset::new(1, 1, 1, vec![1.0], vec![0.5], 0.0),
            Err(ObjectiveError::InvalidLabel { .. })
        ));
        assert!(matches!(
            LogisticDataset::new(1, 1, 2, vec![1.0, 1.0], vec![1.0], 0.0),
            Err(ObjectiveError::NotUnitNorm { .. })
        ));
        let d = single(1.0, 1.0, 0.0);
        assert!(matches!(
            d.logistic_component_value(1, 0, &[0.0]),
            Err(ObjectiveError::NodeOutOfRange { .. })
        ));
        assert!(matches!(
            d.logistic_component_gradient(0, 3, &[0.0]),
            Err(ObjectiveError::ComponentOutOfRange { .. })
        ));
    }

    #[test]
    fn stable_primitives() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!(sigmoid(-800.0f64) >= 0.0 && sigmoid(800.0f64) == 1.0);
        assert!((softplus(0.0f64) - 2f64.ln()).abs() < 1e-16);
        assert_eq!(softplus(1000.0f64), 1000.0);
        assert!((softplus(0.0f32) - 2f32.ln()).abs() < 1e-7);
    }
}
