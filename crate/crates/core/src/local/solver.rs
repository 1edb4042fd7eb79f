use log::warn;
use serde::Serialize;

use super::patch::Patch;
use crate::covering::AdmissibleCovering;
use crate::dec::{Cochain, Dec, NormSpec};
use crate::error::{HodgeError, Result};
use crate::linalg::{norm2, pcg, CgSettings, CsrMatrix, EnvelopeCholesky};
use crate::mesh::{ChartDevelopment, SimplicialManifold};
use crate::par;

/// Patches above this many unknowns are solved by conjugate gradients.
pub const DIRECT_LIMIT: usize = 20_000;

#[derive(Clone, Debug)]
enum Factor {
    /// No interior p-simplex: the solution is zero.
    Empty,
    /// The ball is the whole manifold; no Dirichlet problem exists.
    Closed,
    Direct(EnvelopeCholesky),
    Iterative(CsrMatrix),
}

/// The Dirichlet problem S_II u = M_I ω_I of one patch, factored once.
#[derive(Clone, Debug)]
pub struct DirichletOperator {
    degree: usize,
    factor: Factor,
}

impl DirichletOperator {
    pub fn new(dec: &Dec, patch: &Patch, p: usize) -> Result<Self> {
        let idx = &patch.interior[p];
        let factor = if idx.is_empty() {
            Factor::Empty
        } else if !patch.has_boundary() {
            Factor::Closed
        } else {
            let s = dec.stiffness(p).principal_submatrix(idx);
            if idx.len() > DIRECT_LIMIT {
                Factor::Iterative(s)
            } else {
                Factor::Direct(EnvelopeCholesky::factor(&s).map_err(|e| HodgeError::Ball {
                    ball: patch.ball,
                    message: format!("singular Dirichlet system: {e}"),
                })?)
            }
        };
        Ok(DirichletOperator { degree: p, factor })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// False when the patch is the whole manifold.
    pub fn is_well_posed(&self) -> bool {
        !matches!(self.factor, Factor::Closed)
    }

    /// Interior solution for interior right-hand-side values.
    pub fn solve(&self, dec: &Dec, patch: &Patch, rhs: &[f64]) -> Result<Vec<f64>> {
        let mass = dec.mass(self.degree);
        let b: Vec<f64> = patch.interior[self.degree].iter().zip(rhs).map(|(&g, &w)| mass[g] * w).collect();
        match &self.factor {
            Factor::Empty => Ok(Vec::new()),
            Factor::Closed => Err(HodgeError::NotApplicable(format!(
                "ball {} covers the whole manifold; use the spectral-gap solver",
                patch.ball
            ))),
            Factor::Direct(c) => Ok(c.solve(&b)),
            Factor::Iterative(s) => {
                let scale = norm2(&b).max(f64::MIN_POSITIVE);
                let settings = CgSettings { tol: 1e-12, max_iter: 20 * b.len() };
                let out = pcg(s, &b, &settings, None::<fn(&mut [f64])>, |r| norm2(r) / scale);
                if out.converged {
                    Ok(out.x)
                } else {
                    Err(HodgeError::Stagnation { residual: out.residual, iterations: out.iterations })
                }
            }
        }
    }
}

/// Patches and factored Dirichlet operators for every ball, in one degree.
#[derive(Clone, Debug)]
pub struct LocalSolver {
    pub degree: usize,
    pub patches: Vec<Patch>,
    pub operators: Vec<DirichletOperator>,
}

impl LocalSolver {
    pub fn new(dec: &Dec, cov: &AdmissibleCovering, p: usize) -> Result<Self> {
        let m = dec.mesh();
        let built: Vec<(Patch, DirichletOperator)> = par::try_map_range(cov.len(), |j| {
            let patch = Patch::new(m, j, &cov.balls[j])?;
            let op = DirichletOperator::new(dec, &patch, p)?;
            Ok::<_, HodgeError>((patch, op))
        })?;
        let (patches, operators) = built.into_iter().unzip();
        Ok(LocalSolver { degree: p, patches, operators })
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }
    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Dirichlet solution on ball j for the right-hand side ω restricted to
    /// the ball interior, zero-extended.
    pub fn solve(&self, dec: &Dec, j: usize, omega: &Cochain) -> Result<Cochain> {
        let patch = &self.patches[j];
        let u = self.operators[j].solve(dec, patch, &patch.restrict(omega))?;
        Ok(patch.extend(self.degree, &u))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DirichletSolution {
    pub u: Cochain,
    /// ‖u‖_{W^{2,r}(B)} / ‖ω‖_{L^r(B)}.
    pub constant: f64,
    /// ‖Δu − ω‖ / ‖ω‖ over the interior, in the mass norm.
    pub residual: f64,
}

/// Solves the patch Dirichlet problem Δu = ω on the interior, u = 0 on the boundary.
pub fn solve_local_dirichlet(dec: &Dec, patch: &Patch, omega: &Cochain, r: f64) -> Result<DirichletSolution> {
    dec.check_degree(omega)?;
    let p = omega.degree;
    let op = DirichletOperator::new(dec, patch, p)?;
    let u = patch.extend(p, &op.solve(dec, patch, &patch.restrict(omega))?);
    let (constant, residual) = dirichlet_diagnostics(dec, patch, omega, &u, r);
    Ok(DirichletSolution { u, constant, residual })
}

pub(crate) fn dirichlet_diagnostics(dec: &Dec, patch: &Patch, omega: &Cochain, u: &Cochain, r: f64) -> (f64, f64) {
    let p = omega.degree;
    let local_omega = patch.extend(p, &patch.restrict(omega));
    let spec = NormSpec::lr(r).within(&patch.member_mask);
    let denom = dec.lr_norm_values(p, &local_omega.values, &spec);
    let num = dec.sobolev_norm_values(p, &u.values, &NormSpec::sobolev(r, 2).within(&patch.member_mask));
    let lap = dec.laplacian(p, &u.values);
    let mass = dec.mass(p);
    let (mut res, mut base) = (0.0, 0.0);
    for &i in &patch.interior[p] {
        res += mass[i] * (lap[i] - omega.values[i]).powi(2);
        base += mass[i] * omega.values[i].powi(2);
    }
    let constant = if denom > 0.0 { num / denom } else { 0.0 };
    let residual = if base > 0.0 { (res / base).sqrt() } else { res.sqrt() };
    (constant, residual)
}

/// Interior solution of Δu = 0 with prescribed values on boundary simplices.
pub fn harmonic_extension(dec: &Dec, patch: &Patch, p: usize, boundary_values: &[f64]) -> Result<Cochain> {
    let mut u = vec![0.0; dec.count(p)];
    for (&g, &v) in patch.boundary[p].iter().zip(boundary_values) {
        u[g] = v;
    }
    // S_II u_I = −S_IB u_B = −(S u_B)_I
    let su = dec.stiffness(p).mul_vec(&u);
    let rhs: Vec<f64> = patch.interior[p].iter().map(|&g| -su[g] / dec.mass(p)[g]).collect();
    let op = DirichletOperator::new(dec, patch, p)?;
    let ui = op.solve(dec, patch, &rhs)?;
    for (&g, &v) in patch.interior[p].iter().zip(&ui) {
        u[g] = v;
    }
    Ok(Cochain { degree: p, values: u })
}

/// Lumped masses of the patch recomputed from Euclidean lengths of the
/// patch chart coordinates (the metric frozen to the identity). Entries for
/// simplices not covered by the chart keep their intrinsic value.
#[derive(Clone, Debug)]
pub struct FlatMeasures {
    pub volumes: Vec<Vec<f64>>,
    pub support: Vec<Vec<f64>>,
    pub mass: Vec<Vec<f64>>,
}

impl FlatMeasures {
    pub fn new(m: &SimplicialManifold, patch: &Patch) -> Self {
        let n = m.dim();
        let cap = patch.radius + 2.0 * m.max_edge_length();
        let chart = ChartDevelopment::new(m, patch.center, cap).chart(patch.radius);
        let mut coord: Vec<Option<&[f64]>> = vec![None; m.num_vertices()];
        for (v, c) in chart.members.iter().zip(&chart.coordinates) {
            if c.iter().all(|x| x.is_finite()) {
                coord[*v] = Some(c.as_slice());
            }
        }
        let placed = |s: &[usize]| s.iter().all(|&v| coord[v].is_some());
        let sq = |a: usize, b: usize| {
            let (x, y) = (coord[a].expect("placed"), coord[b].expect("placed"));
            x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>()
        };
        let mut volumes: Vec<Vec<f64>> = (0..=n).map(|p| m.volumes(p).to_vec()).collect();
        let mut support: Vec<Vec<f64>> = (0..=n).map(|p| m.support_volumes(p).to_vec()).collect();
        for (p, vols) in volumes.iter_mut().enumerate() {
            for (i, vol) in vols.iter_mut().enumerate() {
                let s = m.simplex(p, i);
                if placed(s) {
                    *vol = crate::mesh::simplex_volume_from_lengths(p + 1, |a, b| sq(s[a], s[b]));
                }
            }
        }
        // μ_n over fully placed top simplices only; incomplete stars keep the intrinsic value
        for p in 0..=n {
            let share = (0..=p).fold(1usize, |acc, i| acc * (n + 1 - i) / (i + 1)) as f64;
            for i in 0..m.count(p) {
                let s = m.simplex(p, i);
                if !placed(s) {
                    continue;
                }
                let tops = tops_containing(m, p, i);
                if tops.iter().all(|&t| placed(m.simplex(n, t))) {
                    support[p][i] = tops.iter().map(|&t| volumes[n][t]).sum::<f64>() / share;
                }
            }
        }
        let mass = (0..=n)
            .map(|p| support[p].iter().zip(&volumes[p]).map(|(s, v)| s / (v * v)).collect())
            .collect();
        FlatMeasures { volumes, support, mass }
    }

    /// S_p assembled with the flat masses.
    pub fn stiffness(&self, dec: &Dec, p: usize) -> CsrMatrix {
        let n = dec.dim();
        let inv = |v: &[f64]| v.iter().map(|x| 1.0 / x).collect::<Vec<_>>();
        let mut s = CsrMatrix::zeros(dec.count(p), dec.count(p));
        if p > 0 {
            let d = dec.coboundary(p - 1);
            let inner = d.scale(None, Some(&inv(&self.mass[p - 1]))).mul(&d.transpose());
            s = s.add(&inner.scale(Some(&self.mass[p]), Some(&self.mass[p])), 1.0);
        }
        if p < n {
            let d = dec.coboundary(p);
            s = s.add(&d.transpose().mul(&d.scale(Some(&self.mass[p + 1]), None)), 1.0);
        }
        s
    }

    /// L^r norm of a p-cochain over the patch interior with flat measures.
    pub fn lr_norm(&self, patch: &Patch, p: usize, x: &[f64], r: f64) -> f64 {
        let s: f64 = patch.interior[p]
            .iter()
            .map(|&i| self.support[p][i] * (x[i].abs() / self.volumes[p][i]).powf(r))
            .sum();
        s.powf(1.0 / r)
    }
}

fn tops_containing(m: &SimplicialManifold, p: usize, i: usize) -> Vec<usize> {
    let n = m.dim();
    let s = m.simplex(p, i);
    let mut out: Vec<usize> = m.star(s[0]).iter().copied().filter(|&t| s.iter().all(|v| m.simplex(n, t).contains(v))).collect();
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct NeumannOutcome {
    pub u: Cochain,
    /// max_k ‖γ_{k+1}‖ / ‖γ_k‖.
    pub contraction: f64,
    pub iterations: usize,
    /// ‖γ_final‖ / ‖ω‖.
    pub residual: f64,
    pub converged: bool,
}

/// Solves the patch Dirichlet problem by the series v = Σ(−1)^k v_k with
/// Δ_flat v_k = γ_k, γ_0 = ω, γ_{k+1} = (Δ − Δ_flat) v_k.
pub fn neumann_series_solve(
    dec: &Dec,
    patch: &Patch,
    omega: &Cochain,
    r: f64,
    max_iter: usize,
    tol: f64,
) -> Result<NeumannOutcome> {
    dec.check_degree(omega)?;
    let p = omega.degree;
    if !patch.has_boundary() {
        return Err(HodgeError::NotApplicable("patch without boundary".into()));
    }
    let idx = &patch.interior[p];
    if idx.is_empty() {
        return Ok(NeumannOutcome { u: Cochain::zeros(dec.mesh(), p), contraction: 0.0, iterations: 0, residual: 0.0, converged: true });
    }
    let flat = FlatMeasures::new(dec.mesh(), patch);
    let s_flat_full = flat.stiffness(dec, p);
    let s_flat = s_flat_full.principal_submatrix(idx);
    let chol = EnvelopeCholesky::factor(&s_flat)
        .map_err(|e| HodgeError::Ball { ball: patch.ball, message: format!("singular flat system: {e}") })?;
    let spec = NormSpec::lr(r).within(&patch.member_mask);
    let norm = |g: &[f64]| dec.lr_norm_values(p, &patch.extend(p, g).values, &spec);

    let mut gamma = patch.restrict(omega);
    let base = norm(&gamma);
    let mut v = vec![0.0; idx.len()];
    if base == 0.0 {
        return Ok(NeumannOutcome { u: patch.extend(p, &v), contraction: 0.0, iterations: 0, residual: 0.0, converged: true });
    }
    let mut contraction: f64 = 0.0;
    let mut prev = base;
    let mut growth = 0;
    let mut sign = 1.0;
    for k in 1..=max_iter {
        let rhs: Vec<f64> = idx.iter().zip(&gamma).map(|(&g, &x)| flat.mass[p][g] * x).collect();
        let vk = chol.solve(&rhs);
        for (a, b) in v.iter_mut().zip(&vk) {
            *a += sign * b;
        }
        sign = -sign;
        // γ_{k+1} = Δ v_k − Δ_flat v_k on the interior
        let ext = patch.extend(p, &vk);
        let lap = dec.laplacian(p, &ext.values);
        let lap_flat = s_flat_full.mul_vec(&ext.values);
        gamma = idx.iter().map(|&g| lap[g] - lap_flat[g] / flat.mass[p][g]).collect();
        let cur = norm(&gamma);
        let ratio = cur / prev;
        contraction = contraction.max(ratio);
        if cur <= tol * base {
            if contraction >= 0.5 {
                warn!("ball {}: Neumann contraction {contraction:.3} ≥ 0.5", patch.ball);
            }
            return Ok(NeumannOutcome { u: patch.extend(p, &v), contraction, iterations: k, residual: cur / base, converged: true });
        }
        growth = if ratio >= 1.0 { growth + 1 } else { 0 };
        if growth >= 3 {
            return Err(HodgeError::NeumannDivergence { ball: patch.ball, contraction });
        }
        prev = cur;
    }
    if contraction >= 0.5 {
        warn!("ball {}: Neumann contraction {contraction:.3} ≥ 0.5", patch.ball);
    }
    Ok(NeumannOutcome { u: patch.extend(p, &v), contraction, iterations: max_iter, residual: prev / base, converged: false })
}

/// (‖u‖_{W^{2,r}(B(x, R/2))}, R⁻²‖u‖_{L^r(B)}, ‖Δu‖_{L^r(B)}).
pub fn local_czi_check(dec: &Dec, patch: &Patch, half_mask: &[bool], u: &Cochain, r: f64) -> Result<(f64, f64, f64)> {
    dec.check_degree(u)?;
    let p = u.degree;
    if dec.region_mask(p, Some(half_mask)).is_none_or(|mask| !mask.iter().any(|&b| b)) {
        return Err(HodgeError::Ball { ball: patch.ball, message: "empty half-ball".into() });
    }
    let lhs = dec.sobolev_norm_values(p, &u.values, &NormSpec::sobolev(r, 2).within(half_mask));
    let full = NormSpec::lr(r).within(&patch.member_mask);
    let term1 = patch.radius.powi(-2) * dec.lr_norm_values(p, &u.values, &full);
    let term2 = dec.lr_norm_values(p, &dec.laplacian(p, &u.values), &full);
    Ok((lhs, term1, term2))
}

/// Intrinsic and chart-flat L^r norms of u over the patch interior.
pub fn chart_norm_comparison(dec: &Dec, patch: &Patch, u: &Cochain, r: f64) -> (f64, f64) {
    let p = u.degree;
    let flat = FlatMeasures::new(dec.mesh(), patch);
    let intrinsic: f64 = patch.interior[p]
        .iter()
        .map(|&i| dec.mesh().support_volume(p, i) * (u.values[i].abs() / dec.mesh().volume(p, i)).powf(r))
        .sum::<f64>()
        .powf(1.0 / r);
    (intrinsic, flat.lr_norm(patch, p, &u.values, r))
}
