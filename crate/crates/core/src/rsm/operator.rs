//! The raising-steps maps as plain linear operators, with their adjoints in
//! the mass inner product.
//!
//! With G the gluing map ω ↦ Σ_j χ_j Q_j ω (Q_j the ball solve) and
//! N = ΔG − I, k steps give v = Σ_j (−1)^j G N^j ω and
//! ω̃ = (−1)^{k−1} N^k ω. Each Q_j, the gap inverse L and multiplication by
//! χ_j are self-adjoint in the mass inner product, so G* = Σ_j Q_j χ_j.

use super::{multiply_by_function, Localization};
use crate::dec::Cochain;
use crate::error::{HodgeError, Result};
use crate::local::LocalSolver;
use crate::par;
use crate::spectral::{gap_solve_deflated, SpectrumReport};
use crate::workspace::Workspace;

pub struct RsmOperator<'a> {
    ws: &'a Workspace,
    degree: usize,
    steps: usize,
    localization: Localization,
    solver: &'a LocalSolver,
    spectrum: &'a SpectrumReport,
    chi: Vec<Vec<f64>>,
}

impl<'a> RsmOperator<'a> {
    pub fn new(ws: &'a Workspace, degree: usize, steps: usize, localization: Localization) -> Result<Self> {
        let solver = ws.local_solver(degree)?;
        let spectrum = ws.spectrum(degree)?;
        let nv = ws.mesh().num_vertices();
        let part = ws.partition();
        let chi = (0..ws.covering().len())
            .map(|j| multiply_by_function(ws.dec(), degree, &part.column_dense(j, nv), &vec![1.0; ws.dec().count(degree)]))
            .collect();
        Ok(RsmOperator { ws, degree, steps, localization, solver, spectrum, chi })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn cochain(&self, values: Vec<f64>) -> Cochain {
        Cochain { degree: self.degree, values }
    }

    fn scale(&self, j: usize, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.chi[j]).map(|(a, c)| a * c).collect()
    }

    fn local(&self, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        let dec = self.ws.dec();
        if self.solver.operators[j].is_well_posed() {
            Ok(self.solver.solve(dec, j, &self.cochain(x.to_vec()))?.values)
        } else {
            Ok(gap_solve_deflated(dec, self.spectrum, &self.cochain(x.to_vec()))?.f.values)
        }
    }

    fn sum_over_balls(&self, f: impl Fn(usize) -> Result<Vec<f64>> + Sync) -> Result<Vec<f64>> {
        let parts: Vec<Vec<f64>> = par::try_map_range(self.solver.len(), |j| {
            f(j).map_err(|e| HodgeError::Ball { ball: j, message: e.to_string() })
        })?;
        let mut out = vec![0.0; self.ws.dec().count(self.degree)];
        for part in parts {
            for (a, b) in out.iter_mut().zip(part) {
                *a += b;
            }
        }
        Ok(out)
    }

    /// G x.
    pub fn glue(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.sum_over_balls(|j| {
            let rhs = match self.localization {
                Localization::Restrict => x.to_vec(),
                Localization::Partition => self.scale(j, x),
            };
            Ok(self.scale(j, &self.local(j, &rhs)?))
        })
    }

    /// G* x.
    pub fn glue_adjoint(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.sum_over_balls(|j| {
            let u = self.local(j, &self.scale(j, x))?;
            Ok(match self.localization {
                Localization::Restrict => u,
                Localization::Partition => self.scale(j, &u),
            })
        })
    }

    /// (v, ω̃) with Δv = ω + ω̃.
    pub fn apply(&self, omega: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dec = self.ws.dec();
        let mut v = vec![0.0; omega.len()];
        let mut current = omega.to_vec();
        for j in 0..self.steps {
            let g = self.glue(&current)?;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            for (a, b) in v.iter_mut().zip(&g) {
                *a += sign * b;
            }
            let lap = dec.laplacian(self.degree, &g);
            current = lap.iter().zip(&current).map(|(a, b)| a - b).collect();
        }
        let sign = if self.steps % 2 == 1 { 1.0 } else { -1.0 };
        Ok((v, current.iter().map(|x| sign * x).collect()))
    }

    /// u = v − L ω̃: the right inverse of Δ on the harmonic complement.
    pub fn solve(&self, omega: &[f64]) -> Result<Vec<f64>> {
        let (v, tilde) = self.apply(omega)?;
        let f = gap_solve_deflated(self.ws.dec(), self.spectrum, &self.cochain(tilde))?.f.values;
        Ok(v.iter().zip(&f).map(|(a, b)| a - b).collect())
    }

    /// The mass adjoint of [`RsmOperator::solve`]:
    /// Σ_j (−1)^j (N*)^j G* φ − (−1)^{k−1} (N*)^k L φ with N* = G*Δ − I.
    pub fn solve_adjoint(&self, phi: &[f64]) -> Result<Vec<f64>> {
        let dec = self.ws.dec();
        let p = self.degree;
        let n_adj = |x: &[f64]| -> Result<Vec<f64>> {
            let g = self.glue_adjoint(&dec.laplacian(p, x))?;
            Ok(g.iter().zip(x).map(|(a, b)| a - b).collect())
        };
        let mut out = vec![0.0; phi.len()];
        let gphi = self.glue_adjoint(phi)?;
        // Σ_j (−1)^j (N*)^j G*φ
        let mut term = gphi;
        for j in 0..self.steps {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            for (a, b) in out.iter_mut().zip(&term) {
                *a += sign * b;
            }
            if j + 1 < self.steps {
                term = n_adj(&term)?;
            }
        }
        let mut tail = gap_solve_deflated(dec, self.spectrum, &self.cochain(phi.to_vec()))?.f.values;
        for _ in 0..self.steps {
            tail = n_adj(&tail)?;
        }
        // −(−1)^{k−1} = (−1)^k
        let sign = if self.steps % 2 == 0 { 1.0 } else { -1.0 };
        for (a, b) in out.iter_mut().zip(&tail) {
            *a += sign * b;
        }
        Ok(out)
    }
}
