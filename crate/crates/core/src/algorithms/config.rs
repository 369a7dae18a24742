use std::fmt;
use std::str::FromStr;

use super::theory::{max_stepsize, StepSizeBound};
use super::AlgorithmError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    GtSarah,
    Dsgd,
    Dsgt,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::GtSarah => "gt-sarah",
            Algorithm::Dsgd => "dsgd",
            Algorithm::Dsgt => "dsgt",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = AlgorithmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "gt-sarah" | "gtsarah" => Ok(Algorithm::GtSarah),
            "dsgd" => Ok(Algorithm::Dsgd),
            "dsgt" => Ok(Algorithm::Dsgt),
            _ => Err(AlgorithmError::InvalidConfig(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Step size: a fixed positive value or the complexity-variant theoretical bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize<T> {
    Auto,
    Fixed(T),
}

/// How the `B` component indices of a minibatch are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// `B` i.i.d. uniform draws from `{0, .., m-1}`, with replacement.
    #[default]
    Uniform,
    /// Every component exactly once, in order (requires `B = m`). Deterministic.
    FullPass,
}

/// Parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub algorithm: Algorithm,
    pub alpha: StepSize<T>,
    /// Minibatch size `B`, `1 <= B <= m`.
    pub batch: usize,
    /// Inner-loop length `q`.
    pub q: usize,
    /// Outer iterations `S` of GT-SARAH.
    pub outer: usize,
    /// Baseline step count `K`; defaults to `S (q + 1)`, the GT-SARAH round count.
    pub steps: Option<usize>,
    pub seed: u64,
    /// Target accuracy used by the complexity calculators.
    pub epsilon: T,
    pub sampling: Sampling,
}

impl<T: Scalar> RunConfig<T> {
    pub fn new(algorithm: Algorithm) -> Self {
        RunConfig {
            algorithm,
            alpha: StepSize::Auto,
            batch: 1,
            q: 1,
            outer: 1,
            steps: None,
            seed: 0,
            epsilon: T::lit(0.1),
            sampling: Sampling::Uniform,
        }
    }

    /// Checks the configuration against a problem with `m` components per node.
    pub fn validate(&self, m: usize) -> Result<(), AlgorithmError> {
        if self.batch == 0 || self.batch > m {
            return Err(AlgorithmError::InvalidBatch { batch: self.batch, m });
        }
        if self.sampling == Sampling::FullPass && self.batch != m {
            return Err(AlgorithmError::InvalidConfig(format!(
                "full-pass sampling requires B = m = {m}, got B = {}",
                self.batch
            )));
        }
        if self.q == 0 {
            return Err(AlgorithmError::InvalidConfig("q must be positive".into()));
        }
        if self.outer == 0 {
            return Err(AlgorithmError::InvalidConfig("S must be positive".into()));
        }
        if self.steps == Some(0) {
            return Err(AlgorithmError::InvalidConfig("steps must be positive".into()));
        }
        if !(self.epsilon > T::zero()) {
            return Err(AlgorithmError::InvalidConfig("epsilon must be positive".into()));
        }
        if let StepSize::Fixed(a) = self.alpha {
            if !(a > T::zero()) || !a.is_finite() {
                return Err(AlgorithmError::NonPositiveStepSize(a.to_f64_lossy()));
            }
        }
        Ok(())
    }

    /// Step size after resolving `Auto` against the network and smoothness constant.
    pub fn resolve_alpha(&self, n: usize, lambda: T, l: T) -> Result<T, AlgorithmError> {
        match self.alpha {
            StepSize::Fixed(a) if a > T::zero() && a.is_finite() => Ok(a),
            StepSize::Fixed(a) => Err(AlgorithmError::NonPositiveStepSize(a.to_f64_lossy())),
            StepSize::Auto => max_stepsize(n, self.batch, self.q, lambda, l, StepSizeBound::Complexity),
        }
    }

    pub fn baseline_steps(&self) -> usize {
        self.steps.unwrap_or(self.outer * (self.q + 1))
    }
}
