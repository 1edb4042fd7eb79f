//! Discrete exterior calculus on simplicial cochains with lumped masses.
//!
//! The degree-p mass of a simplex σ is μ_n(σ)/μ_p(σ)², where μ_p is its
//! p-volume and μ_n the share of the surrounding n-volume attached to it.
//! With these masses d* = M⁻¹dᵀM is exactly adjoint to d.

mod norms;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HodgeError, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::SimplicialManifold;

pub use norms::{sobolev_exponent, threshold_steps, NormSpec, SobolevTerms};

/// A discrete p-form: one value per p-simplex (sorted vertex orientation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(m: &SimplicialManifold, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > m.dim() {
            return Err(HodgeError::DegreeMismatch { expected: m.dim(), found: degree });
        }
        if values.len() != m.count(degree) {
            return Err(HodgeError::LengthMismatch { degree, expected: m.count(degree), found: values.len() });
        }
        Ok(Cochain { degree, values })
    }

    pub fn zeros(m: &SimplicialManifold, degree: usize) -> Self {
        Cochain { degree, values: vec![0.0; m.count(degree)] }
    }

    /// Independent uniform entries in [-1, 1].
    pub fn random(m: &SimplicialManifold, degree: usize, rng: &mut impl Rng) -> Self {
        Cochain { degree, values: (0..m.count(degree)).map(|_| rng.random_range(-1.0..=1.0)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Cochain { degree: self.degree, values: self.values.iter().map(|v| a * v).collect() }
    }

    pub fn plus(&self, other: &Cochain) -> Self {
        debug_assert_eq!(self.degree, other.degree);
        Cochain { degree: self.degree, values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn minus(&self, other: &Cochain) -> Self {
        debug_assert_eq!(self.degree, other.degree);
        Cochain { degree: self.degree, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Sparse linear map between cochain spaces. `target` is `None` for maps
/// into the empty space (d on top forms, d* on functions).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormOperator {
    pub source: usize,
    pub target: Option<usize>,
    pub matrix: CsrMatrix,
    pub symmetric: bool,
}

impl FormOperator {
    pub fn apply(&self, x: &Cochain) -> Result<Cochain> {
        if x.degree != self.source {
            return Err(HodgeError::DegreeMismatch { expected: self.source, found: x.degree });
        }
        if x.len() != self.matrix.ncols() {
            return Err(HodgeError::LengthMismatch { degree: x.degree, expected: self.matrix.ncols(), found: x.len() });
        }
        Ok(Cochain { degree: self.target.unwrap_or(self.source), values: self.matrix.mul_vec(&x.values) })
    }

    pub fn is_zero_map(&self) -> bool {
        self.matrix.nnz() == 0
    }

    /// `row col value` lines, one per stored entry.
    pub fn to_triplet_text(&self) -> String {
        self.matrix.to_triplet_text()
    }
}

/// Assembled operators of one manifold.
#[derive(Clone, Debug)]
pub struct Dec {
    mesh: Arc<SimplicialManifold>,
    mass: Vec<Vec<f64>>,
    /// d[p]: C^p → C^{p+1} for p < n.
    d: Vec<CsrMatrix>,
    dt: Vec<CsrMatrix>,
    /// S_p = M_p Δ_p, symmetric positive semi-definite.
    stiffness: Vec<CsrMatrix>,
}

fn coboundary_matrix(m: &SimplicialManifold, p: usize) -> CsrMatrix {
    let rows = m.count(p + 1);
    let mut t = Vec::with_capacity(rows * (p + 2));
    for i in 0..rows {
        for &(f, s) in m.faces(p + 1, i) {
            t.push((i, f, f64::from(s)));
        }
    }
    CsrMatrix::from_triplets(rows, m.count(p), &t)
}

fn inv(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| 1.0 / x).collect()
}

impl Dec {
    pub fn new(mesh: Arc<SimplicialManifold>) -> Self {
        let n = mesh.dim();
        let mass: Vec<Vec<f64>> = (0..=n).map(|p| mesh.mass(p)).collect();
        let d: Vec<CsrMatrix> = (0..n).map(|p| coboundary_matrix(&mesh, p)).collect();
        let dt: Vec<CsrMatrix> = d.iter().map(CsrMatrix::transpose).collect();
        let stiffness = (0..=n)
            .map(|p| {
                let mut s = CsrMatrix::zeros(mesh.count(p), mesh.count(p));
                if p > 0 {
                    // M_p d M_{p-1}⁻¹ dᵀ M_p
                    let inner = d[p - 1].scale(None, Some(&inv(&mass[p - 1]))).mul(&dt[p - 1]);
                    s = s.add(&inner.scale(Some(&mass[p]), Some(&mass[p])), 1.0);
                }
                if p < n {
                    // dᵀ M_{p+1} d
                    s = s.add(&dt[p].mul(&d[p].scale(Some(&mass[p + 1]), None)), 1.0);
                }
                s
            })
            .collect();
        Dec { mesh, mass, d, dt, stiffness }
    }

    pub fn from_mesh(mesh: &SimplicialManifold) -> Self {
        Self::new(Arc::new(mesh.clone()))
    }

    pub fn mesh(&self) -> &SimplicialManifold {
        &self.mesh
    }
    pub fn mesh_arc(&self) -> Arc<SimplicialManifold> {
        Arc::clone(&self.mesh)
    }
    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }
    pub fn count(&self, p: usize) -> usize {
        self.mesh.count(p)
    }
    /// Diagonal of M_p.
    pub fn mass(&self, p: usize) -> &[f64] {
        &self.mass[p]
    }
    pub fn stiffness(&self, p: usize) -> &CsrMatrix {
        &self.stiffness[p]
    }
    pub fn coboundary(&self, p: usize) -> &CsrMatrix {
        &self.d[p]
    }

    /// ⟨a, b⟩ in the degree-p mass inner product.
    pub fn inner(&self, p: usize, a: &[f64], b: &[f64]) -> f64 {
        crate::linalg::wdot(&self.mass[p], a, b)
    }
    pub fn norm(&self, p: usize, a: &[f64]) -> f64 {
        self.inner(p, a, a).max(0.0).sqrt()
    }

    /// d_p x (empty for p = n).
    pub fn d(&self, p: usize, x: &[f64]) -> Vec<f64> {
        if p >= self.dim() {
            return Vec::new();
        }
        self.d[p].mul_vec(x)
    }

    /// d*_p x = M_{p-1}⁻¹ dᵀ M_p x (empty for p = 0).
    pub fn dstar(&self, p: usize, x: &[f64]) -> Vec<f64> {
        if p == 0 {
            return Vec::new();
        }
        let mx: Vec<f64> = x.iter().zip(&self.mass[p]).map(|(a, b)| a * b).collect();
        self.dt[p - 1].mul_vec(&mx).iter().zip(&self.mass[p - 1]).map(|(a, b)| a / b).collect()
    }

    /// Δ_p x = M_p⁻¹ S_p x.
    pub fn laplacian(&self, p: usize, x: &[f64]) -> Vec<f64> {
        self.stiffness[p].mul_vec(x).iter().zip(&self.mass[p]).map(|(a, b)| a / b).collect()
    }

    /// d d* x.
    pub fn d_dstar(&self, p: usize, x: &[f64]) -> Vec<f64> {
        if p == 0 {
            return vec![0.0; x.len()];
        }
        self.d(p - 1, &self.dstar(p, x))
    }

    /// d* d x.
    pub fn dstar_d(&self, p: usize, x: &[f64]) -> Vec<f64> {
        if p >= self.dim() {
            return vec![0.0; x.len()];
        }
        self.dstar(p + 1, &self.d(p, x))
    }

    pub fn exterior_derivative(&self, p: usize) -> FormOperator {
        let matrix = if p < self.dim() { self.d[p].clone() } else { CsrMatrix::zeros(0, self.count(p)) };
        FormOperator { source: p, target: (p < self.dim()).then_some(p + 1), matrix, symmetric: false }
    }

    pub fn codifferential(&self, p: usize) -> FormOperator {
        let matrix = if p == 0 {
            CsrMatrix::zeros(0, self.count(0))
        } else {
            self.dt[p - 1].scale(Some(&inv(&self.mass[p - 1])), Some(&self.mass[p]))
        };
        FormOperator { source: p, target: p.checked_sub(1), matrix, symmetric: false }
    }

    pub fn hodge_laplacian(&self, p: usize) -> FormOperator {
        FormOperator {
            source: p,
            target: Some(p),
            matrix: self.stiffness[p].scale(Some(&inv(&self.mass[p])), None),
            symmetric: true,
        }
    }

    pub fn check_degree(&self, c: &Cochain) -> Result<()> {
        if c.degree > self.dim() {
            return Err(HodgeError::DegreeMismatch { expected: self.dim(), found: c.degree });
        }
        if c.len() != self.count(c.degree) {
            return Err(HodgeError::LengthMismatch { degree: c.degree, expected: self.count(c.degree), found: c.len() });
        }
        Ok(())
    }

    /// Largest relative adjointness defect |⟨du,v⟩ − ⟨u,d*v⟩| / (‖du‖‖v‖ + ‖u‖‖d*v‖)
    /// over the given pairs.
    pub fn adjointness_defect(&self, p: usize, pairs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        pairs
            .iter()
            .map(|(u, v)| {
                let du = self.d(p, u);
                let dsv = self.dstar(p + 1, v);
                let lhs = self.inner(p + 1, &du, v);
                let rhs = self.inner(p, u, &dsv);
                let scale = self.norm(p + 1, &du) * self.norm(p + 1, v) + self.norm(p, u) * self.norm(p, &dsv);
                if scale > 0.0 {
                    (lhs - rhs).abs() / scale
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

/// d_p as a standalone operator.
pub fn exterior_derivative(m: &SimplicialManifold, p: usize) -> FormOperator {
    let matrix = if p < m.dim() { coboundary_matrix(m, p) } else { CsrMatrix::zeros(0, m.count(p)) };
    FormOperator { source: p, target: (p < m.dim()).then_some(p + 1), matrix, symmetric: false }
}

pub fn codifferential(m: &SimplicialManifold, p: usize) -> FormOperator {
    Dec::from_mesh(m).codifferential(p)
}

pub fn hodge_laplacian(m: &SimplicialManifold, p: usize) -> FormOperator {
    Dec::from_mesh(m).hodge_laplacian(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_manifold, ManifoldKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus() -> Dec {
        Dec::from_mesh(&generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap())
    }

    #[test]
    fn d_of_constant_vanishes() {
        let dec = torus();
        assert!(dec.d(0, &vec![3.0; dec.count(0)]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dd_is_exactly_zero() {
        let dec = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = Cochain::random(dec.mesh(), 0, &mut rng);
        assert!(dec.d(1, &dec.d(0, &u.values)).iter().all(|&x| x == 0.0));
        assert_eq!(dec.d(2, &vec![1.0; dec.count(2)]).len(), 0);
    }

    #[test]
    fn codifferential_is_adjoint() {
        let dec = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in 0..2 {
            let pairs: Vec<_> = (0..20)
                .map(|_| {
                    (Cochain::random(dec.mesh(), p, &mut rng).values, Cochain::random(dec.mesh(), p + 1, &mut rng).values)
                })
                .collect();
            assert!(dec.adjointness_defect(p, &pairs) < 1e-13);
        }
    }

    #[test]
    fn laplacian_matches_d_dstar_plus_dstar_d() {
        let dec = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Cochain::random(dec.mesh(), 1, &mut rng);
        let lap = dec.laplacian(1, &u.values);
        let sum: Vec<f64> = dec.d_dstar(1, &u.values).iter().zip(dec.dstar_d(1, &u.values)).map(|(a, b)| a + b).collect();
        for (a, b) in lap.iter().zip(&sum) {
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn stiffness_is_symmetric() {
        let dec = torus();
        for p in 0..=2 {
            let s = dec.stiffness(p);
            assert!(s.asymmetry() <= 1e-12 * s.max_abs());
        }
    }

    #[test]
    fn boundary_operators_map_to_empty_space() {
        let dec = torus();
        assert!(dec.codifferential(0).target.is_none());
        assert!(dec.exterior_derivative(2).target.is_none());
        assert_eq!(dec.codifferential(0).matrix.nrows(), 0);
    }
}
