use serde::{Deserialize, Serialize};

use super::vitali::AdmissibleCovering;
use crate::error::{HodgeError, Result};
use crate::mesh::SimplicialManifold;

/// χ_j = φ_j / Σ_k φ_k with φ_j = q(d(·, x_j)/R_j), q(t) = (1 − t²)³.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Partition {
    /// Per ball: (vertex, χ_j(vertex)) over the ball members.
    pub columns: Vec<Vec<(usize, f64)>>,
    /// Per ball: sup over edges of |χ_j(a) − χ_j(b)| / ℓ_ab.
    pub gradient: Vec<f64>,
    /// Per ball: sup over vertices of |Δ₀χ_j|.
    pub laplacian: Vec<f64>,
    /// max_j R_j · gradient_j.
    pub c_chi: f64,
    /// max_j R_j² · laplacian_j.
    pub c_chi2: f64,
    /// R̃ = Σ_j χ_j R_j.
    pub smooth_radius: Vec<f64>,
}

pub fn bump(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - t * t).powi(3)
    }
}

impl Partition {
    /// χ_j as a dense vertex function.
    pub fn column_dense(&self, j: usize, nv: usize) -> Vec<f64> {
        let mut out = vec![0.0; nv];
        for &(v, c) in &self.columns[j] {
            out[v] = c;
        }
        out
    }

    /// (vertex, ball, χ) entries.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t: Vec<(usize, usize, f64)> =
            self.columns.iter().enumerate().flat_map(|(j, col)| col.iter().map(move |&(v, c)| (v, j, c))).collect();
        t.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        t
    }

    /// Largest |Σ_j χ_j(v) − 1| over vertices.
    pub fn sum_defect(&self, nv: usize) -> f64 {
        let mut sums = vec![0.0; nv];
        for col in &self.columns {
            for &(v, c) in col {
                sums[v] += c;
            }
        }
        sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn vertex_laplacian(m: &SimplicialManifold, m0: &[f64], m1: &[f64], f: &[f64], v: usize) -> f64 {
    m.neighbors(v).iter().map(|&(w, e)| m1[e] * (f[v] - f[w])).sum::<f64>() / m0[v]
}

/// Builds the partition of unity of a covering and stores it.
pub fn partition_of_unity(m: &SimplicialManifold, cov: &mut AdmissibleCovering) -> Result<()> {
    let nv = m.num_vertices();
    let mut total = vec![0.0; nv];
    let phis: Vec<Vec<(usize, f64)>> = cov
        .balls
        .iter()
        .map(|b| b.members.iter().zip(&b.distances).map(|(&v, &d)| (v, bump(d / b.radius))).collect())
        .collect();
    for col in &phis {
        for &(v, p) in col {
            total[v] += p;
        }
    }
    if let Some(v) = total.iter().position(|&s| !(s > 0.0)) {
        return Err(HodgeError::CoverageGap { vertex: v });
    }
    let columns: Vec<Vec<(usize, f64)>> =
        phis.iter().map(|col| col.iter().map(|&(v, p)| (v, p / total[v])).collect()).collect();

    let m0 = m.mass(0);
    let m1 = m.mass(1);
    let mut gradient = Vec::with_capacity(columns.len());
    let mut laplacian = Vec::with_capacity(columns.len());
    let mut smooth_radius = vec![0.0; nv];
    for (j, col) in columns.iter().enumerate() {
        let mut chi = vec![0.0; nv];
        for &(v, c) in col {
            chi[v] = c;
            smooth_radius[v] += c * cov.balls[j].radius;
        }
        let mut g: f64 = 0.0;
        let mut l: f64 = 0.0;
        for &(v, _) in col {
            for &(w, e) in m.neighbors(v) {
                g = g.max((chi[v] - chi[w]).abs() / m.edge_length(e));
                l = l.max(vertex_laplacian(m, &m0, &m1, &chi, w).abs());
            }
            l = l.max(vertex_laplacian(m, &m0, &m1, &chi, v).abs());
        }
        gradient.push(g);
        laplacian.push(l);
    }
    let c_chi = gradient.iter().zip(&cov.balls).map(|(g, b)| g * b.radius).fold(0.0, f64::max);
    let c_chi2 = laplacian.iter().zip(&cov.balls).map(|(l, b)| l * b.radius * b.radius).fold(0.0, f64::max);
    cov.partition = Some(Partition { columns, gradient, laplacian, c_chi, c_chi2, smooth_radius });
    Ok(())
}
