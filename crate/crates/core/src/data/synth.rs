use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::DataError;
use crate::objective::{LogisticDataset, QuadraticProblem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthKind {
    /// Every node holds the same components.
    Homogeneous,
    /// Node-specific data.
    #[default]
    Heterogeneous,
}

impl std::str::FromStr for SynthKind {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "homogeneous" => Ok(SynthKind::Homogeneous),
            "heterogeneous" => Ok(SynthKind::Heterogeneous),
            other => Err(DataError::InvalidArgument(format!("unknown synthetic kind `{other}`"))),
        }
    }
}

fn gauss(rng: &mut ChaCha12Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn check_shape(n: usize, m: usize, p: usize) -> Result<(), DataError> {
    if n == 0 || m == 0 || p == 0 {
        return Err(DataError::InvalidArgument(format!(
            "n, m and p must be positive (got {n}, {m}, {p})"
        )));
    }
    Ok(())
}

/// Quadratic components `1/2 sum_d a (x_d - c_d)^2` with curvatures in `[0.5, 2]`.
/// Heterogeneous nodes get centres scattered around a node-specific offset, so their
/// local minimizers differ. `F*` is available in closed form.
pub fn synthesize_quadratic<T: Scalar>(
    kind: SynthKind,
    n: usize,
    m: usize,
    p: usize,
    seed: u64,
) -> Result<QuadraticProblem<T>, DataError> {
    check_shape(n, m, p)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw_node = |rng: &mut ChaCha12Rng, offset: &[f64]| {
        let mut a = Vec::with_capacity(m * p);
        let mut c = Vec::with_capacity(m * p);
        for _ in 0..m {
            for &o in offset.iter().take(p) {
                a.push(T::lit(rng.gen_range(0.5..2.0)));
                c.push(T::lit(o + gauss(rng)));
            }
        }
        (a, c)
    };
    let mut curv = Vec::with_capacity(n * m * p);
    let mut centre = Vec::with_capacity(n * m * p);
    match kind {
        SynthKind::Homogeneous => {
            let (a, c) = draw_node(&mut rng, &vec![0.0; p]);
            for _ in 0..n {
                curv.extend_from_slice(&a);
                centre.extend_from_slice(&c);
            }
        }
        SynthKind::Heterogeneous => {
            for _ in 0..n {
                let offset: Vec<f64> = (0..p).map(|_| 2.0 * gauss(&mut rng)).collect();
                let (a, c) = draw_node(&mut rng, &offset);
                curv.extend(a);
                centre.extend(c);
            }
        }
    }
    Ok(QuadraticProblem::new(n, m, p, curv, centre)?)
}

/// Parameters of the synthetic binary classification generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticSynth {
    pub kind: SynthKind,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub seed: u64,
    /// Weight `R` of the non-convex regularizer.
    pub reg: f64,
    /// Probability of flipping each label.
    pub label_noise: f64,
    /// Scale of the node-specific feature shift and teacher perturbation.
    pub heterogeneity: f64,
}

impl Default for LogisticSynth {
    fn default() -> Self {
        LogisticSynth {
            kind: SynthKind::Heterogeneous,
            n: 4,
            m: 100,
            p: 10,
            seed: 0,
            reg: 1e-4,
            label_noise: 0.1,
            heterogeneity: 1.0,
        }
    }
}

fn unit(v: &mut [f64]) {
    let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|a| *a /= nrm);
    } else {
        v[0] = 1.0;
    }
}

/// Unit-norm features around a node-specific mean, labelled by a node-specific
/// perturbation of a shared teacher and flipped with probability `label_noise`.
pub fn synthesize_logistic<T: Scalar>(spec: &LogisticSynth) -> Result<LogisticDataset<T>, DataError> {
    let LogisticSynth { kind, n, m, p, seed, reg, label_noise, heterogeneity } = *spec;
    check_shape(n, m, p)?;
    if !(0.0..=1.0).contains(&label_noise) {
        return Err(DataError::InvalidArgument(format!("label noise {label_noise} outside [0, 1]")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut teacher: Vec<f64> = (0..p).map(|_| gauss(&mut rng)).collect();
    unit(&mut teacher);
    let node_data = |rng: &mut ChaCha12Rng, h: f64| {
        let mean: Vec<f64> = (0..p).map(|_| h * gauss(rng)).collect();
        let mut w: Vec<f64> = teacher.iter().map(|&t| t + h * gauss(rng)).collect();
        unit(&mut w);
        let mut feats = Vec::with_capacity(m * p);
        let mut labels = Vec::with_capacity(m);
        for _ in 0..m {
            let mut x: Vec<f64> = mean.iter().map(|&mu| mu + gauss(rng)).collect();
            unit(&mut x);
            let margin: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
            let mut y = if margin >= 0.0 { 1.0 } else { -1.0 };
            if rng.gen_bool(label_noise) {
                y = -y;
            }
            feats.extend(x);
            labels.push(y);
        }
        (feats, labels)
    };
    let mut features = Vec::with_capacity(n * m * p);
    let mut labels = Vec::with_capacity(n * m);
    match kind {
        SynthKind::Homogeneous => {
            let (f, l) = node_data(&mut rng, 0.0);
            for _ in 0..n {
                features.extend(f.iter().map(|&v| T::lit(v)));
                labels.extend(l.iter().map(|&v| T::lit(v)));
            }
        }
        SynthKind::Heterogeneous => {
            for _ in 0..n {
                let (f, l) = node_data(&mut rng, heterogeneity);
                features.extend(f.into_iter().map(T::lit));
                labels.extend(l.into_iter().map(T::lit));
            }
        }
    }
    Ok(LogisticDataset::new(n, m, p, features, labels, T::lit(reg))?)
}
