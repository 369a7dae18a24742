use ndarray::Array2;

use super::GraphError;
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Second largest singular value of a doubly stochastic matrix together with the
/// spectral gap `1 - lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralQuantities<T> {
    pub lambda: T,
    pub gap: T,
}

/// Computes `lambda = ||W - (1/n) 1 1^T||` (spectral norm), which equals the second
/// largest singular value of a doubly stochastic `W`.
///
/// Symmetric inputs are diagonalised directly; otherwise the Gram matrix of the
/// deflated operator is diagonalised and the root of its top eigenvalue is taken.
pub fn spectral_quantities<T: Scalar>(w: &Array2<T>) -> Result<SpectralQuantities<T>, GraphError> {
    let (rows, cols) = w.dim();
    if rows != cols {
        return Err(GraphError::NonSquare { rows, cols });
    }
    let n = rows;
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let avg = T::one() / T::from_usize_lossy(n);
    let deflated = w.mapv(|v| v - avg);

    let symmetric = (0..n).all(|i| {
        (0..i).all(|j| (deflated[(i, j)] - deflated[(j, i)]).abs() <= T::stochastic_tolerance())
    });
    let lambda = if symmetric {
        symmetric_eigenvalues(deflated)
            .into_iter()
            .fold(T::zero(), |acc, e| acc.max(e.abs()))
    } else {
        let gram = deflated.t().dot(&deflated);
        symmetric_eigenvalues(gram)
            .into_iter()
            .fold(T::zero(), |acc, e| acc.max(e))
            .sqrt()
    };
    Ok(SpectralQuantities {
        lambda,
        gap: T::one() - lambda,
    })
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (ascending order).
pub fn symmetric_eigenvalues<T: Scalar>(mut a: Array2<T>) -> Vec<T> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let two = T::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let v = a[(i, j)] * a[(i, j)];
                total += v;
                if i != j {
                    off += v;
                }
            }
        }
        // rounding keeps the off-diagonal mass near (n eps)^2 of the total
        let floor = T::from_usize_lossy(n) * T::epsilon();
        if off <= floor * floor * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eig: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    eig
}
