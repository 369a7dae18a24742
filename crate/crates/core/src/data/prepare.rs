use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::{DataError, RawDataset};
use crate::objective::LogisticDataset;
use crate::scalar::{norm, Scalar};

/// Maps raw labels to `+1`, `-1` or "drop".
#[derive(Debug, Clone, PartialEq)]
pub enum LabelRule {
    /// Positive labels to `+1`, negative to `-1`, zero dropped.
    Sign,
    /// Listed values to `+1` or `-1`; everything else dropped.
    Map { positive: Vec<f64>, negative: Vec<f64> },
    /// `> t` to `+1`, otherwise `-1`.
    Threshold(f64),
}

impl LabelRule {
    /// Fashion-MNIST "T-shirt/top" (class 0) versus "Dress" (class 3).
    pub fn fashion_mnist_tshirt_dress() -> Self {
        LabelRule::Map {
            positive: vec![0.0],
            negative: vec![3.0],
        }
    }

    pub fn apply(&self, label: f64) -> Option<f64> {
        match self {
            LabelRule::Sign if label > 0.0 => Some(1.0),
            LabelRule::Sign if label < 0.0 => Some(-1.0),
            LabelRule::Sign => None,
            LabelRule::Map { positive, negative } => {
                if positive.contains(&label) {
                    Some(1.0)
                } else if negative.contains(&label) {
                    Some(-1.0)
                } else {
                    None
                }
            }
            LabelRule::Threshold(t) => Some(if label > *t { 1.0 } else { -1.0 }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions<T> {
    /// Use at most this many samples (taken after the shuffle).
    pub cap: Option<usize>,
    /// Weight `R` of the non-convex regularizer.
    pub reg: T,
}

impl<T: Scalar> Default for PrepareOptions<T> {
    fn default() -> Self {
        PrepareOptions {
            cap: None,
            reg: T::lit(1e-4),
        }
    }
}

/// Which raw samples each node received, and what was discarded on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// `nodes[i][j]` is the raw index of component `j` at node `i`.
    pub nodes: Vec<Vec<usize>>,
    pub m: usize,
    /// Samples surviving the label rule and the zero-vector filter.
    pub usable: usize,
    pub dropped_by_label: usize,
    pub dropped_zero: usize,
    pub dropped_by_cap: usize,
    /// Shuffled remainder that did not fill a full share.
    pub dropped_surplus: usize,
}

/// Binarizes labels, unit-normalizes features, shuffles with `seed` and deals `m =
/// floor(kept / n)` samples to each node in order.
pub fn prepare<T: Scalar>(
    raw: &RawDataset<T>,
    n: usize,
    seed: u64,
    rule: &LabelRule,
    options: &PrepareOptions<T>,
) -> Result<(LogisticDataset<T>, Partition), DataError> {
    if raw.is_empty() {
        return Err(DataError::Empty);
    }
    if n == 0 {
        return Err(DataError::InvalidArgument("n must be positive".into()));
    }
    let mut usable = Vec::new();
    let mut dropped_by_label = 0;
    let mut dropped_zero = 0;
    let (mut pos, mut neg) = (0usize, 0usize);
    for (k, (x, y)) in raw.samples.iter().zip(&raw.labels).enumerate() {
        let Some(label) = rule.apply(y.to_f64_lossy()) else {
            dropped_by_label += 1;
            continue;
        };
        if norm(x) == T::zero() {
            dropped_zero += 1;
            continue;
        }
        if label > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
        usable.push((k, T::lit(label)));
    }
    if dropped_zero > 0 {
        log::warn!("dropped {dropped_zero} zero feature vectors that cannot be normalized");
    }
    if !usable.is_empty() && (pos == 0 || neg == 0) {
        log::warn!("label rule leaves one class empty ({pos} positive, {neg} negative)");
    }
    let count = usable.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    usable.shuffle(&mut rng);
    let capped = options.cap.map_or(count, |c| c.min(count));
    let m = capped / n;
    if m == 0 {
        return Err(DataError::TooFewSamples { kept: capped, n });
    }
    let p = raw.p;
    let mut features = Vec::with_capacity(n * m * p);
    let mut labels = Vec::with_capacity(n * m);
    let mut nodes = Vec::with_capacity(n);
    for chunk in usable[..n * m].chunks(m) {
        let mut idx = Vec::with_capacity(m);
        for &(k, label) in chunk {
            let x = &raw.samples[k];
            let inv = T::one() / norm(x);
            features.extend(x.iter().map(|&v| v * inv));
            labels.push(label);
            idx.push(k);
        }
        nodes.push(idx);
    }
    let dataset = LogisticDataset::new(n, m, p, features, labels, options.reg)?;
    let partition = Partition {
        nodes,
        m,
        usable: count,
        dropped_by_label,
        dropped_zero,
        dropped_by_cap: count - capped,
        dropped_surplus: capped - n * m,
    };
    Ok((dataset, partition))
}
