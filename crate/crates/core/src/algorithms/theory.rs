//! Step-size bounds, parameter recommendations and complexity predictions for
//! GT-SARAH. The complexity expressions are returned without the universal constants
//! hidden by the order notation.

use std::fmt;

use super::AlgorithmError;
use crate::scalar::Scalar;

/// Which step-size bound to evaluate. The two bounds differ only in the exponent of
/// the third term: `1/4` for asymptotic convergence, `1/3` for the complexity result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSizeBound {
    Asymptotic,
    Complexity,
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<(), AlgorithmError> {
    if !(lambda >= T::zero() && lambda < T::one()) {
        return Err(AlgorithmError::LambdaOutOfRange(lambda.to_f64_lossy()));
    }
    Ok(())
}

fn positive(name: &str, v: usize) -> Result<(), AlgorithmError> {
    if v == 0 {
        return Err(AlgorithmError::InvalidConfig(format!("{name} must be positive")));
    }
    Ok(())
}

/// The three terms of the step-size min-expression before the `1/(2L)` factor.
pub fn stepsize_terms<T: Scalar>(
    n: usize,
    batch: usize,
    q: usize,
    lambda: T,
    variant: StepSizeBound,
) -> [T; 3] {
    let one_minus_sq = T::one() - lambda * lambda;
    let nb = T::from_usize_lossy(n * batch);
    let qf = T::from_usize_lossy(q);
    let first = one_minus_sq * one_minus_sq / (T::lit(4.0) * T::lit(42.0).sqrt());
    let second = (nb / (T::lit(6.0) * qf)).sqrt();
    let base = T::lit(4.0) * nb / (T::lit(7.0) * nb + T::lit(24.0) * qf);
    let exponent = match variant {
        StepSizeBound::Asymptotic => T::lit(0.25),
        StepSizeBound::Complexity => T::one() / T::lit(3.0),
    };
    let third = base.powf(exponent) * one_minus_sq / T::lit(6.0);
    [first, second, third]
}

/// Largest admissible GT-SARAH step size:
/// `min{(1-λ²)²/(4√42), (nB/6q)^{1/2}, (4nB/(7nB+24q))^{e} (1-λ²)/6} / (2L)`.
pub fn max_stepsize<T: Scalar>(
    n: usize,
    batch: usize,
    q: usize,
    lambda: T,
    l: T,
    variant: StepSizeBound,
) -> Result<T, AlgorithmError> {
    positive("n", n)?;
    positive("B", batch)?;
    positive("q", q)?;
    check_lambda(lambda)?;
    if !(l > T::zero()) {
        return Err(AlgorithmError::NonPositiveSmoothness(l.to_f64_lossy()));
    }
    let terms = stepsize_terms(n, batch, q, lambda, variant);
    let min = terms.iter().copied().fold(T::infinity(), T::min);
    Ok(min / (T::lit(2.0) * l))
}

/// Whether the minibatch is tuned for gradient or communication complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchGoal {
    Gradient,
    Communication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recommendation {
    pub batch: usize,
    pub q: usize,
}

/// `R = max{sqrt(m/n) (1-λ)^3, 1}`.
pub fn gradient_batch_threshold<T: Scalar>(n: usize, m: usize, lambda: T) -> T {
    let ratio = (T::from_usize_lossy(m) / T::from_usize_lossy(n)).sqrt();
    (ratio * (T::one() - lambda).powi(3)).max(T::one())
}

/// `C = max{sqrt(m/n) (1-λ)^{3/2}, 1}`.
pub fn communication_batch_threshold<T: Scalar>(n: usize, m: usize, lambda: T) -> T {
    let ratio = (T::from_usize_lossy(m) / T::from_usize_lossy(n)).sqrt();
    (ratio * (T::one() - lambda).powf(T::lit(1.5))).max(T::one())
}

fn clamp_batch<T: Scalar>(b: T, m: usize) -> usize {
    b.to_usize().unwrap_or(usize::MAX).clamp(1, m)
}

/// `B = floor(R)` (gradient goal) or `ceil(C)` (communication goal), and `q = ceil(m/B)`.
pub fn recommend_parameters<T: Scalar>(
    n: usize,
    m: usize,
    lambda: T,
    goal: BatchGoal,
) -> Result<Recommendation, AlgorithmError> {
    positive("n", n)?;
    positive("m", m)?;
    check_lambda(lambda)?;
    let batch = match goal {
        BatchGoal::Gradient => clamp_batch(gradient_batch_threshold(n, m, lambda).floor(), m),
        BatchGoal::Communication => {
            clamp_batch(communication_batch_threshold(n, m, lambda).ceil(), m)
        }
    };
    Ok(Recommendation {
        batch,
        q: m.div_ceil(batch),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `n <= sqrt(N) (1-λ)^3`.
    BigData,
    /// `n >= sqrt(N) (1-λ)^{3/2}`.
    LargeNetwork,
    Intermediate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::BigData => "big-data",
            Regime::LargeNetwork => "large-network",
            Regime::Intermediate => "intermediate",
        })
    }
}

pub fn classify_regime<T: Scalar>(n: usize, m: usize, lambda: T) -> Regime {
    let root_n = T::from_usize_lossy(n * m).sqrt();
    let gap = T::one() - lambda;
    let nf = T::from_usize_lossy(n);
    if nf <= root_n * gap.powi(3) {
        Regime::BigData
    } else if nf >= root_n * gap.powf(T::lit(1.5)) {
        Regime::LargeNetwork
    } else {
        Regime::Intermediate
    }
}

/// Predicted cost of reaching an `ε`-accurate stationary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityEstimate<T> {
    /// Component gradient computations across all nodes.
    pub gradients: T,
    /// Communication rounds.
    pub rounds: T,
    pub regime: Regime,
    /// `floor(R)`, clamped to `[1, m]`.
    pub gradient_optimal_batch: usize,
    /// `ceil(C)`, clamped to `[1, m]`.
    pub communication_optimal_batch: usize,
}

/// Evaluates
/// `H = max{nB/(1-λ)², N^{1/2}, m^{1/3} n^{2/3} B^{1/3}/(1-λ)} Δ/ε²` and
/// `K = max{1/(1-λ)², m^{1/2}/(n^{1/2} B), m^{1/3}/(n^{1/3} B^{2/3} (1-λ))} Δ/ε²`.
pub fn predicted_complexity<T: Scalar>(
    n: usize,
    m: usize,
    batch: usize,
    lambda: T,
    delta: T,
    epsilon: T,
) -> Result<ComplexityEstimate<T>, AlgorithmError> {
    positive("n", n)?;
    positive("m", m)?;
    positive("B", batch)?;
    check_lambda(lambda)?;
    if !(epsilon > T::zero()) || !(delta > T::zero()) {
        return Err(AlgorithmError::InvalidConfig("delta and epsilon must be positive".into()));
    }
    let nf = T::from_usize_lossy(n);
    let mf = T::from_usize_lossy(m);
    let bf = T::from_usize_lossy(batch);
    let gap = T::one() - lambda;
    let third = T::one() / T::lit(3.0);
    let scale = delta / (epsilon * epsilon);

    let h_terms = [
        nf * bf / (gap * gap),
        (nf * mf).sqrt(),
        mf.powf(third) * nf.powf(T::lit(2.0) * third) * bf.powf(third) / gap,
    ];
    let k_terms = [
        T::one() / (gap * gap),
        mf.sqrt() / (nf.sqrt() * bf),
        mf.powf(third) / (nf.powf(third) * bf.powf(T::lit(2.0) * third) * gap),
    ];
    let max = |xs: [T; 3]| xs.into_iter().fold(T::zero(), T::max);
    Ok(ComplexityEstimate {
        gradients: max(h_terms) * scale,
        rounds: max(k_terms) * scale,
        regime: classify_regime(n, m, lambda),
        gradient_optimal_batch: clamp_batch(gradient_batch_threshold(n, m, lambda).floor(), m),
        communication_optimal_batch: clamp_batch(
            communication_batch_threshold(n, m, lambda).ceil(),
            m,
        ),
    })
}
