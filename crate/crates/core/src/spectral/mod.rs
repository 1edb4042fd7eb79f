//! Lowest spectrum of the Hodge Laplacian in the mass inner product, the
//! harmonic projection and the inverse on the harmonic complement.

use log::warn;
use serde::Serialize;

use crate::dec::{Cochain, Dec};
use crate::error::{HodgeError, Result};
use crate::linalg::{lowest_eigenpairs, pcg, rank_mod_p, CgSettings, EigenMethod};

/// Problems up to this many unknowns use the dense eigensolver.
pub const DENSE_LIMIT: usize = 3000;
pub const DEFAULT_HARMONIC_TOL: f64 = 1e-8;
/// Eigenvalues closer than this factor to the threshold make the split ambiguous.
const CLUSTER_FACTOR: f64 = 100.0;
/// A gap below this fraction of the largest eigenvalue is treated as an unresolved kernel.
const NEAR_KERNEL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct RankIdentity {
    pub degree: usize,
    pub total: usize,
    /// rank d_{p−1}.
    pub exact: usize,
    /// rank d_p (= rank d*_{p+1}).
    pub coexact: usize,
    pub harmonic: usize,
}

impl RankIdentity {
    pub fn new(dec: &Dec, p: usize) -> Self {
        let m = dec.mesh();
        let exact = if p == 0 { 0 } else { rank_mod_p(&m.coboundary_rows(p - 1)) };
        let coexact = rank_mod_p(&m.coboundary_rows(p));
        let total = m.count(p);
        RankIdentity { degree: p, total, exact, coexact, harmonic: total - exact - coexact }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub degree: usize,
    /// Lowest computed eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Largest eigenvalue of Δ_p (exact or estimated).
    pub largest: f64,
    /// Relative threshold; the absolute one is `relative_tol * largest`.
    pub relative_tol: f64,
    pub harmonic_tol: f64,
    pub harmonic_dim: usize,
    /// First eigenvalue above the threshold (∞ if none was computed).
    pub gap: f64,
    /// Mass-orthonormal basis of the discrete harmonic space.
    #[serde(skip)]
    pub basis: Vec<Vec<f64>>,
    pub method: EigenMethod,
    pub ranks: RankIdentity,
    /// Eigenvalues near the threshold, or a kernel count disagreeing with the ranks.
    pub near_kernel_cluster: bool,
}

/// Lowest `m_eigs` eigenpairs of Δ_p with the default threshold.
pub fn spectrum(dec: &Dec, p: usize, m_eigs: usize) -> Result<SpectrumReport> {
    spectrum_with_tol(dec, p, m_eigs, DEFAULT_HARMONIC_TOL)
}

pub fn spectrum_with_tol(dec: &Dec, p: usize, m_eigs: usize, relative_tol: f64) -> Result<SpectrumReport> {
    spectrum_with(dec, p, m_eigs, relative_tol, DENSE_LIMIT)
}

/// As [`spectrum_with_tol`] with an explicit dense/iterative switch-over.
pub fn spectrum_with(dec: &Dec, p: usize, m_eigs: usize, relative_tol: f64, dense_limit: usize) -> Result<SpectrumReport> {
    if p > dec.dim() {
        return Err(HodgeError::Domain(format!("degree {p} exceeds dimension {}", dec.dim())));
    }
    if !(relative_tol > 0.0) {
        return Err(HodgeError::Domain("harmonic tolerance must be positive".into()));
    }
    let ranks = RankIdentity::new(dec, p);
    let m_eigs = m_eigs.max(ranks.harmonic + 3).min(dec.count(p));
    // M^{-1/2} S M^{-1/2} is symmetric with the same spectrum as Δ = M^{-1} S
    let inv_sqrt: Vec<f64> = dec.mass(p).iter().map(|m| 1.0 / m.sqrt()).collect();
    let a = dec.stiffness(p).scale(Some(&inv_sqrt), Some(&inv_sqrt));
    let pairs = lowest_eigenpairs(&a, m_eigs, dense_limit)?;
    let largest = pairs.largest;
    let harmonic_tol = relative_tol * largest;
    let harmonic_dim = pairs.values.iter().take_while(|&&v| v < harmonic_tol).count();
    let gap = pairs.values.get(harmonic_dim).copied().unwrap_or(f64::INFINITY);
    let basis: Vec<Vec<f64>> = pairs.vectors[..harmonic_dim]
        .iter()
        .map(|y| y.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect())
        .collect();
    // roundoff makes kernel eigenvalues O(ε·largest) of either sign
    let ambiguous = pairs.values.iter().any(|&v| {
        v.abs() > harmonic_tol / CLUSTER_FACTOR && (v < harmonic_tol || v.abs() < harmonic_tol * CLUSTER_FACTOR)
    });
    let near_kernel_cluster = ambiguous || gap < NEAR_KERNEL * largest || harmonic_dim != ranks.harmonic;
    if near_kernel_cluster {
        warn!(
            "degree {p}: near-kernel eigenvalue cluster (harmonic dim {harmonic_dim}, rank count {}, gap {gap:e})",
            ranks.harmonic
        );
    }
    Ok(SpectrumReport {
        degree: p,
        eigenvalues: pairs.values,
        largest,
        relative_tol,
        harmonic_tol,
        harmonic_dim,
        gap,
        basis,
        method: pairs.method,
        ranks,
        near_kernel_cluster,
    })
}

impl SpectrumReport {
    /// Hx = Σ ⟨x, h_i⟩ h_i on raw values.
    pub fn project_values(&self, dec: &Dec, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for h in &self.basis {
            let c = dec.inner(self.degree, x, h);
            for (o, v) in out.iter_mut().zip(h) {
                *o += c * v;
            }
        }
        out
    }

    /// x − Hx in place.
    pub fn deflate(&self, dec: &Dec, x: &mut [f64]) {
        for h in &self.basis {
            let c = dec.inner(self.degree, x, h);
            for (o, v) in x.iter_mut().zip(h) {
                *o -= c * v;
            }
        }
    }

    /// Harmonic basis as cochains.
    pub fn harmonic_basis(&self) -> Vec<Cochain> {
        self.basis.iter().map(|h| Cochain { degree: self.degree, values: h.clone() }).collect()
    }
}

pub fn harmonic_projection(dec: &Dec, spec: &SpectrumReport, omega: &Cochain) -> Result<Cochain> {
    if omega.degree != spec.degree {
        return Err(HodgeError::DegreeMismatch { expected: spec.degree, found: omega.degree });
    }
    dec.check_degree(omega)?;
    Ok(Cochain { degree: spec.degree, values: spec.project_values(dec, &omega.values) })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapSolution {
    pub f: Cochain,
    /// ‖Δf − (g − Hg)‖ / ‖g‖ in the mass norm.
    pub residual: f64,
    pub iterations: usize,
    /// ‖f‖ ≤ ‖g‖/η.
    pub bound_holds: bool,
}

pub const GAP_SOLVE_TOL: f64 = 1e-11;
/// Tolerance on ‖Hg‖/‖g‖ accepted by [`gap_solve`].
pub const PROJECT_FIRST_TOL: f64 = 1e-8;

/// f ⊥ harmonics with Δf = g − Hg. Errors when ‖Hg‖ > 1e-8‖g‖.
pub fn gap_solve(dec: &Dec, spec: &SpectrumReport, g: &Cochain) -> Result<GapSolution> {
    let hg = harmonic_projection(dec, spec, g)?;
    let gn = dec.norm(g.degree, &g.values);
    if gn > 0.0 && dec.norm(g.degree, &hg.values) > PROJECT_FIRST_TOL * gn {
        return Err(HodgeError::ProjectFirst { relative: dec.norm(g.degree, &hg.values) / gn });
    }
    gap_solve_deflated(dec, spec, g)
}

/// As [`gap_solve`] without the input check: solves Δf = g − Hg.
pub fn gap_solve_deflated(dec: &Dec, spec: &SpectrumReport, g: &Cochain) -> Result<GapSolution> {
    let p = g.degree;
    let mut rhs = g.values.clone();
    spec.deflate(dec, &mut rhs);
    let mass = dec.mass(p);
    let b: Vec<f64> = rhs.iter().zip(mass).map(|(x, m)| x * m).collect();
    let gn = dec.norm(p, &g.values);
    // M^{-1}-norm of the dual residual is the mass norm of the Δ residual
    let dual_norm = |r: &[f64]| r.iter().zip(mass).map(|(x, m)| x * x / m).sum::<f64>().sqrt();
    if gn == 0.0 || dual_norm(&b) == 0.0 {
        return Ok(GapSolution { f: Cochain { degree: p, values: vec![0.0; g.len()] }, residual: 0.0, iterations: 0, bound_holds: true });
    }
    let settings = CgSettings { tol: GAP_SOLVE_TOL, max_iter: 50 * g.len().max(100) };
    let project = |x: &mut [f64]| spec.deflate(dec, x);
    let out = pcg(dec.stiffness(p), &b, &settings, Some(project), |r| dual_norm(r) / gn);
    if !out.converged {
        return Err(HodgeError::Stagnation { residual: out.residual, iterations: out.iterations });
    }
    let f = Cochain { degree: p, values: out.x };
    let lap = dec.laplacian(p, &f.values);
    let diff: Vec<f64> = lap.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let residual = dec.norm(p, &diff) / gn;
    let bound_holds = dec.norm(p, &f.values) <= gn / spec.gap * (1.0 + 1e-9);
    Ok(GapSolution { f, residual, iterations: out.iterations, bound_holds })
}

/// Measured sup of ‖h‖_{L^s}/‖h‖_{L²} over each basis element and over
/// `samples` random unit combinations.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingRatios {
    pub s: f64,
    pub per_basis: Vec<f64>,
    pub c_s: f64,
}

pub fn harmonic_embedding_check(
    dec: &Dec,
    spec: &SpectrumReport,
    s: f64,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> Result<EmbeddingRatios> {
    if !(s >= 2.0) {
        return Err(HodgeError::Domain(format!("embedding exponent must be ≥ 2, got {s}")));
    }
    let p = spec.degree;
    let ratio = |h: &[f64]| {
        let l2 = dec.lr_norm_values(p, h, &crate::dec::NormSpec::lr(2.0));
        let ls = dec.lr_norm_values(p, h, &crate::dec::NormSpec::lr(s));
        if l2 > 0.0 {
            ls / l2
        } else {
            0.0
        }
    };
    let per_basis: Vec<f64> = spec.basis.iter().map(|h| ratio(h)).collect();
    let mut c_s = per_basis.iter().copied().fold(0.0, f64::max);
    if spec.basis.len() > 1 {
        for _ in 0..samples {
            let mut x = vec![0.0; dec.count(p)];
            for h in &spec.basis {
                let c: f64 = rng.random_range(-1.0..1.0);
                for (o, v) in x.iter_mut().zip(h) {
                    *o += c * v;
                }
            }
            c_s = c_s.max(ratio(&x));
        }
    }
    Ok(EmbeddingRatios { s, per_basis, c_s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_manifold, ManifoldKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dec(kind: ManifoldKind, n: usize) -> Dec {
        Dec::from_mesh(&generate_test_manifold(kind, n, 0.0).unwrap())
    }

    #[test]
    fn torus_and_sphere_betti_numbers() {
        let t = dec(ManifoldKind::FlatTorus, 16);
        let s = dec(ManifoldKind::Sphere, 16);
        let dims: Vec<usize> = (0..=2).map(|p| spectrum(&t, p, 6).unwrap().harmonic_dim).collect();
        assert_eq!(dims, vec![1, 2, 1]);
        let dims: Vec<usize> = (0..=2).map(|p| spectrum(&s, p, 6).unwrap().harmonic_dim).collect();
        assert_eq!(dims, vec![1, 0, 1]);
        let r = RankIdentity::new(&t, 1);
        assert_eq!(r.exact + r.coexact + r.harmonic, r.total);
    }

    #[test]
    fn basis_is_mass_orthonormal() {
        let t = dec(ManifoldKind::FlatTorus, 8);
        let sp = spectrum(&t, 1, 6).unwrap();
        assert!(!sp.near_kernel_cluster);
        for (i, a) in sp.basis.iter().enumerate() {
            for (j, b) in sp.basis.iter().enumerate() {
                let e = t.inner(1, a, b) - if i == j { 1.0 } else { 0.0 };
                assert!(e.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shift_invert_agrees_with_dense() {
        let t = dec(ManifoldKind::FlatTorus, 8);
        let dense = spectrum_with(&t, 1, 6, DEFAULT_HARMONIC_TOL, DENSE_LIMIT).unwrap();
        let iter = spectrum_with(&t, 1, 6, DEFAULT_HARMONIC_TOL, 0).unwrap();
        assert_eq!(iter.method, EigenMethod::ShiftInvert);
        assert_eq!(dense.harmonic_dim, iter.harmonic_dim);
        assert!((dense.gap - iter.gap).abs() < 1e-8 * dense.gap);
    }

    #[test]
    fn tiny_tolerance_flags_a_cluster() {
        let t = dec(ManifoldKind::FlatTorus, 8);
        let sp = spectrum_with_tol(&t, 1, 6, 1e-30).unwrap();
        assert!(sp.near_kernel_cluster);
    }

    #[test]
    fn gap_solve_inverts_laplacian_on_complement() {
        let t = dec(ManifoldKind::FlatTorus, 16);
        let sp = spectrum(&t, 1, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = Cochain::random(t.mesh(), 1, &mut rng);
        let g = Cochain { degree: 1, values: t.laplacian(1, &psi.values) };
        let sol = gap_solve(&t, &sp, &g).unwrap();
        assert!(sol.residual < 1e-11 && sol.bound_holds);
        let mut expect = psi.values.clone();
        sp.deflate(&t, &mut expect);
        let err: Vec<f64> = expect.iter().zip(&sol.f.values).map(|(a, b)| a - b).collect();
        assert!(t.norm(1, &err) < 1e-9 * t.norm(1, &expect));
    }

    #[test]
    fn harmonic_input_gives_zero_and_unprojected_input_is_rejected() {
        let t = dec(ManifoldKind::FlatTorus, 8);
        let sp = spectrum(&t, 1, 6).unwrap();
        let h = sp.harmonic_basis().remove(0);
        assert!(matches!(gap_solve(&t, &sp, &h), Err(HodgeError::ProjectFirst { .. })));
        let sol = gap_solve_deflated(&t, &sp, &h).unwrap();
        assert_eq!(sol.f.max_abs(), 0.0);
    }

    #[test]
    fn constant_embedding_ratio_is_closed_form() {
        let t = dec(ManifoldKind::Sphere, 8);
        let sp = spectrum(&t, 0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let vol = t.mesh().total_volume();
        let e = harmonic_embedding_check(&t, &sp, 4.0, 0, &mut rng).unwrap();
        assert!((e.c_s - vol.powf(0.25 - 0.5)).abs() < 1e-10);
        let e2 = harmonic_embedding_check(&t, &sp, 2.0, 0, &mut rng).unwrap();
        assert!((e2.c_s - 1.0).abs() < 1e-14);
    }
}
