//! Envelope (skyline) Cholesky factorization with reverse Cuthill–McKee
//! ordering. Patches and mesh Laplacians are banded after RCM, so the
//! envelope stays small and the factorization is cheap.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;
use crate::error::{HodgeError, Result};

/// Reverse Cuthill–McKee permutation of a symmetric sparsity pattern.
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        // pseudo-peripheral start: walk to the last BFS level twice
        let mut root = start;
        for _ in 0..2 {
            let far = last_level_min_degree(adj, &degree, root);
            if far == root {
                break;
            }
            root = far;
        }
        if visited[root] {
            root = start;
        }
        let mut queue = VecDeque::new();
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            nbrs.sort_by_key(|&u| (degree[u], u));
            for u in nbrs {
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order.reverse();
    order
}

fn last_level_min_degree(adj: &[Vec<usize>], degree: &[usize], root: usize) -> usize {
    let mut level = vec![usize::MAX; adj.len()];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = root;
    while let Some(v) = queue.pop_front() {
        let better = level[v] > level[last] || (level[v] == level[last] && degree[v] < degree[last]);
        if better {
            last = v;
        }
        for &u in &adj[v] {
            if level[u] == usize::MAX {
                level[u] = level[v] + 1;
                queue.push_back(u);
            }
        }
    }
    last
}

/// `L Lᵀ = P A Pᵀ` with `L` stored row-wise over its envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factor a symmetric positive definite matrix. Only the lower triangle
    /// (after permutation) is read.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "Cholesky needs a square matrix");
        let perm = reverse_cuthill_mckee(&a.pattern());
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (c, _) in a.row(old) {
                let cn = inv[c];
                if cn < first[new] {
                    first[new] = cn;
                }
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        for i in 0..n {
            row_start.push(row_start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; row_start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (c, v) in a.row(old) {
                let cn = inv[c];
                if cn <= new {
                    data[row_start[new] + cn - first[new]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let ri = row_start[i];
            for j in fi..i {
                let fj = first[j];
                let rj = row_start[j];
                let k0 = fi.max(fj);
                let mut s = data[ri + j - fi];
                for k in k0..j {
                    s -= data[ri + k - fi] * data[rj + k - fj];
                }
                data[ri + j - fi] = s / data[rj + j - fj];
            }
            let diag = data[ri + i - fi];
            let mut d = diag;
            for k in fi..i {
                let l = data[ri + k - fi];
                d -= l * l;
            }
            // relative pivot floor: exact singularity shows up as roundoff-sized pivots
            if !(d > 1e-13 * diag.abs()) || !d.is_finite() {
                return Err(HodgeError::NotPositiveDefinite { pivot: perm[i], value: d });
            }
            data[ri + i - fi] = d.sqrt();
        }
        Ok(Self {
            n,
            perm,
            first,
            row_start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let ri = self.row_start[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.data[ri + k - fi] * y[k];
            }
            y[i] = s / self.data[ri + i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let ri = self.row_start[i];
            y[i] /= self.data[ri + i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.data[ri + k - fi] * yi;
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + shift));
            t.push((i, (i + 1) % n, -1.0));
            t.push(((i + 1) % n, i, -1.0));
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn solves_periodic_shifted_laplacian() {
        let a = laplacian_1d(50, 0.1);
        let chol = EnvelopeCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = chol.solve(&b);
        let r = a.mul_vec(&x);
        let err = r.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "residual {err}");
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = laplacian_1d(10, 0.0);
        assert!(EnvelopeCholesky::factor(&a).is_err());
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(17, 0.0);
        let mut p = reverse_cuthill_mckee(&a.pattern());
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }
}
