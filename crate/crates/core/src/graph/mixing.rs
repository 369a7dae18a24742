use std::collections::VecDeque;
use std::fmt;
use std::io::Write;

use ndarray::{Array2, ArrayView2, ArrayViewMut1};

use super::spectral::spectral_quantities;
use super::{GraphError, Topology};
use crate::scalar::Scalar;

/// Doubly stochastic weight matrix `W` of a network, plus its spectral quantity.
///
/// Besides the dense entries the matrix keeps the sparse support of each row so that
/// neighbourhood averaging costs `O(deg)` per node. Row sums are accumulated in
/// ascending neighbour order, which keeps every mixing step bitwise reproducible.
#[derive(Debug, Clone)]
pub struct MixingMatrix<T> {
    entries: Array2<T>,
    support: Vec<Vec<(usize, T)>>,
    lambda: T,
}

impl<T: Scalar> MixingMatrix<T> {
    /// Wraps a dense matrix after checking every weight-matrix requirement.
    pub fn from_entries(entries: Array2<T>) -> Result<Self, GraphError> {
        let report = validate_mixing(&entries);
        if !report.all_pass() {
            return Err(GraphError::InvalidMixing(report.to_string()));
        }
        let sq = spectral_quantities(&entries)?;
        let support = entries
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &w)| w != T::zero())
                    .map(|(r, &w)| (r, w))
                    .collect()
            })
            .collect();
        Ok(MixingMatrix {
            entries,
            support,
            lambda: sq.lambda,
        })
    }

    /// Exact averaging matrix `J = (1/n) 1 1^T`.
    pub fn averaging(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let w = T::one() / T::from_usize_lossy(n);
        Self::from_entries(Array2::from_elem((n, n), w))
    }

    pub fn identity_single() -> Self {
        Self::from_entries(Array2::from_elem((1, 1), T::one())).expect("[1] is a valid mixing matrix")
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }

    pub fn weight(&self, i: usize, r: usize) -> T {
        self.entries[(i, r)]
    }

    /// Nonzero `(r, w_ir)` pairs of row `i`, ascending in `r`.
    pub fn row_support(&self, i: usize) -> &[(usize, T)] {
        &self.support[i]
    }

    /// Second largest singular value.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn spectral_gap(&self) -> T {
        T::one() - self.lambda
    }

    /// Writes row `i` of `(W ⊗ I_p) x` into `out`, where `x` stacks node vectors as rows.
    pub fn mix_row(&self, i: usize, x: ArrayView2<'_, T>, mut out: ArrayViewMut1<'_, T>) {
        out.fill(T::zero());
        for &(r, w) in &self.support[i] {
            for (o, &v) in out.iter_mut().zip(x.row(r).iter()) {
                *o += w * v;
            }
        }
    }

    /// `(W ⊗ I_p) x` for the `n × p` stacked state `x`.
    pub fn mix(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let mut out = Array2::zeros(x.raw_dim());
        for i in 0..self.n() {
            self.mix_row(i, x, out.row_mut(i));
        }
        out
    }

    /// CSV export: `n` rows of `n` comma-separated reals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in self.entries.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Lazy Metropolis weights `W = (I + M)/2` with `m_ir = 1/(1 + max(deg_i, deg_r))` on
/// every edge and `m_ii = 1 - sum_{r != i} m_ir`. Degrees exclude self-loops.
pub fn lazy_metropolis_weights<T: Scalar>(topo: &Topology) -> Result<MixingMatrix<T>, GraphError> {
    let n = topo.n();
    let deg = topo.degrees();
    let half = T::lit(0.5);
    let mut m = Array2::<T>::zeros((n, n));
    for &(a, b) in topo.edges() {
        let w = T::one() / T::from_usize_lossy(1 + deg[a].max(deg[b]));
        m[(a, b)] = w;
        m[(b, a)] = w;
    }
    for i in 0..n {
        let off: T = (0..n).filter(|&r| r != i).map(|r| m[(i, r)]).sum();
        m[(i, i)] = T::one() - off;
    }
    let mut w = m.mapv(|v| v * half);
    for i in 0..n {
        w[(i, i)] += half;
    }
    MixingMatrix::from_entries(w)
}

/// Outcome of checking a candidate weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub square: bool,
    pub nonnegative: bool,
    pub row_sums: bool,
    pub column_sums: bool,
    pub positive_diagonal: bool,
    /// Strongly connected support graph together with a positive diagonal.
    pub primitive: bool,
    pub max_row_deviation: f64,
    pub max_column_deviation: f64,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.square
            && self.nonnegative
            && self.row_sums
            && self.column_sums
            && self.positive_diagonal
            && self.primitive
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(f, "square: {}", mark(self.square))?;
        writeln!(f, "nonnegative: {}", mark(self.nonnegative))?;
        writeln!(
            f,
            "row_sums: {} (max deviation {:e})",
            mark(self.row_sums),
            self.max_row_deviation
        )?;
        writeln!(
            f,
            "column_sums: {} (max deviation {:e})",
            mark(self.column_sums),
            self.max_column_deviation
        )?;
        writeln!(f, "positive_diagonal: {}", mark(self.positive_diagonal))?;
        write!(f, "primitive: {}", mark(self.primitive))
    }
}

/// Checks nonnegativity, unit row and column sums, a positive diagonal and
/// primitivity of a weight matrix. Never fails; every check is reported.
pub fn validate_mixing<T: Scalar>(w: &Array2<T>) -> ValidationReport {
    let (rows, cols) = w.dim();
    if rows != cols || rows == 0 {
        return ValidationReport {
            square: false,
            nonnegative: false,
            row_sums: false,
            column_sums: false,
            positive_diagonal: false,
            primitive: false,
            max_row_deviation: f64::INFINITY,
            max_column_deviation: f64::INFINITY,
        };
    }
    let n = rows;
    let tol = T::stochastic_tolerance();
    let nonnegative = w.iter().all(|&v| v >= T::zero());
    let max_row = (0..n)
        .map(|i| (w.row(i).sum() - T::one()).abs())
        .fold(T::zero(), T::max);
    let max_col = (0..n)
        .map(|j| (w.column(j).sum() - T::one()).abs())
        .fold(T::zero(), T::max);
    let positive_diagonal = (0..n).all(|i| w[(i, i)] > T::zero());
    let primitive = positive_diagonal && strongly_connected(w);
    ValidationReport {
        square: true,
        nonnegative,
        row_sums: max_row <= tol,
        column_sums: max_col <= tol,
        positive_diagonal,
        primitive,
        max_row_deviation: max_row.to_f64_lossy(),
        max_column_deviation: max_col.to_f64_lossy(),
    }
}

fn strongly_connected<T: Scalar>(w: &Array2<T>) -> bool {
    let n = w.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                let weight = if forward { w[(u, v)] } else { w[(v, u)] };
                if !seen[v] && weight > T::zero() {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    };
    reach(true) && reach(false)
}
