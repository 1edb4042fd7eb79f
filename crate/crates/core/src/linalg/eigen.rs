//! Lowest eigenpairs of sparse symmetric matrices.
//!
//! Two routes: a dense symmetric eigensolve (the oracle, used below a size
//! limit) and shift-invert block subspace iteration with full
//! reorthogonalization and Rayleigh–Ritz extraction.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cholesky::EnvelopeCholesky;
use super::sparse::{dot, CsrMatrix};
use crate::error::{HodgeError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    ShiftInvert,
}

#[derive(Clone, Debug)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Euclidean-orthonormal eigenvectors, one per value.
    pub vectors: Vec<Vec<f64>>,
    /// Largest eigenvalue (exact on the dense route, power-iteration estimate otherwise).
    pub largest: f64,
    pub method: EigenMethod,
    pub iterations: usize,
}

/// Dense route: all eigenvalues, lowest `m` vectors kept.
pub fn dense_lowest(a: &CsrMatrix, m: usize) -> EigenPairs {
    let n = a.nrows();
    let mut dense = a.to_dense();
    // symmetrize roundoff
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (dense[(i, j)] + dense[(j, i)]);
            dense[(i, j)] = v;
            dense[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(dense);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let largest = order.last().map_or(0.0, |&i| eig.eigenvalues[i]);
    let keep = m.min(n);
    let values = order[..keep].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order[..keep]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    EigenPairs { values, vectors, largest, method: EigenMethod::Dense, iterations: 0 }
}

/// Estimate of the largest eigenvalue by power iteration (PSD input).
pub fn largest_eigenvalue_estimate(a: &CsrMatrix, iterations: usize) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a5e);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let nx = dot(&x, &x).sqrt();
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = a.mul_vec(&x);
        lambda = dot(&x, &y);
        x = y;
    }
    lambda
}

fn orthonormalize(block: &mut [Vec<f64>]) {
    for i in 0..block.len() {
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for j in 0..i {
                let (head, tail) = block.split_at_mut(i);
                let c = dot(&tail[0], &head[j]);
                for (t, h) in tail[0].iter_mut().zip(&head[j]) {
                    *t -= c * h;
                }
            }
        }
        let nrm = dot(&block[i], &block[i]).sqrt();
        if nrm > 0.0 {
            block[i].iter_mut().for_each(|v| *v /= nrm);
        }
    }
}

/// Shift-invert subspace iteration for the `m` lowest eigenpairs of a
/// symmetric positive semi-definite matrix.
pub fn shift_invert_lowest(a: &CsrMatrix, m: usize, tol: f64, max_iter: usize) -> Result<EigenPairs> {
    let n = a.nrows();
    let m = m.min(n);
    let block = (m + (m / 2).max(6)).min(n);
    let scale = largest_eigenvalue_estimate(a, 60).max(f64::MIN_POSITIVE);
    let shift = 1e-7 * scale;
    let shifted = a.add(&CsrMatrix::identity(n), shift);
    let chol = EnvelopeCholesky::factor(&shifted)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x0e16_e45e);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut x);
    let mut values = vec![0.0; block];
    for it in 1..=max_iter {
        let mut y: Vec<Vec<f64>> = x.iter().map(|col| chol.solve(col)).collect();
        orthonormalize(&mut y);
        let ay: Vec<Vec<f64>> = y.iter().map(|col| a.mul_vec(col)).collect();
        let mut h = DMatrix::zeros(block, block);
        for i in 0..block {
            for j in 0..=i {
                let v = 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut new_x = vec![vec![0.0; n]; block];
        let mut new_ax = vec![vec![0.0; n]; block];
        for (k, &col) in order.iter().enumerate() {
            values[k] = eig.eigenvalues[col];
            for j in 0..block {
                let c = eig.eigenvectors[(j, col)];
                if c != 0.0 {
                    for (t, s) in new_x[k].iter_mut().zip(&y[j]) {
                        *t += c * s;
                    }
                    for (t, s) in new_ax[k].iter_mut().zip(&ay[j]) {
                        *t += c * s;
                    }
                }
            }
        }
        x = new_x;
        let worst = (0..m)
            .map(|k| {
                let r: f64 = new_ax[k]
                    .iter()
                    .zip(&x[k])
                    .map(|(ax, xv)| (ax - values[k] * xv).powi(2))
                    .sum();
                r.sqrt()
            })
            .fold(0.0, f64::max);
        if worst <= tol * scale {
            x.truncate(m);
            values.truncate(m);
            return Ok(EigenPairs {
                values,
                vectors: x,
                largest: scale,
                method: EigenMethod::ShiftInvert,
                iterations: it,
            });
        }
    }
    Err(HodgeError::EigenNoConvergence { iterations: max_iter })
}

/// Dense below `dense_limit` unknowns, shift-invert above.
pub fn lowest_eigenpairs(a: &CsrMatrix, m: usize, dense_limit: usize) -> Result<EigenPairs> {
    if a.nrows() <= dense_limit {
        Ok(dense_lowest(a, m))
    } else {
        shift_invert_lowest(a, m, 1e-11, 2000)
    }
}
