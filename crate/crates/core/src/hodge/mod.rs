//! Poisson solves and Hodge decompositions built on the raising steps and
//! the spectral-gap inverse.

mod czi;
mod decompose;

pub use czi::{czi_study, fit_constants, sample_smooth_forms, weighted_czi_verify, CziFit, CziSample, CziSettings, CziStudy};
pub use decompose::{
    orthogonality_check, strong_decomposition, weak_decomposition, DecompositionMode, HodgeDecomposition,
    OrthogonalityTable, WeakDecomposition, WeakLevel, WeakSettings,
};

use serde::Serialize;

use crate::covering::{weight_integrability, WeightField};
use crate::dec::{sobolev_exponent, Cochain, NormSpec};
use crate::error::{HodgeError, Result};
use crate::rsm::{raising_steps, RsmConfig, RsmOperator, RsmTrace};
use crate::spectral::{gap_solve_deflated, harmonic_projection, PROJECT_FIRST_TOL};
use crate::workspace::Workspace;

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn require_projected(ws: &Workspace, omega: &Cochain) -> Result<()> {
    let dec = ws.dec();
    let spec = ws.spectrum(omega.degree)?;
    let h = harmonic_projection(dec, spec, omega)?;
    let on = dec.norm(omega.degree, &omega.values);
    let hn = dec.norm(omega.degree, &h.values);
    if hn > PROJECT_FIRST_TOL * on {
        return Err(HodgeError::ProjectFirst { relative: hn / on });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonSolution {
    pub u: Cochain,
    /// ‖Δu − ω‖ / ‖ω‖ in the mass norm.
    pub residual: f64,
    /// ‖u‖_{W^{2,r}(M, α)}.
    pub sobolev_norm: f64,
    /// t = min(2, S_2(r)) and ‖u‖_{L^t(M, α)}.
    pub integrability_exponent: f64,
    pub lt_norm: f64,
    /// γ(α, r).
    pub weight_integrability: f64,
    pub trace: RsmTrace,
}

/// u = v − L(ω̃) with (v, ω̃) from the raising steps; Δu = ω when Hω = 0.
pub fn poisson_solve(ws: &Workspace, omega: &Cochain, config: &RsmConfig, alpha: &WeightField) -> Result<PoissonSolution> {
    if !(config.r < 2.0) {
        return Err(HodgeError::Domain(format!("the weighted Poisson solve needs r < 2, got {}", config.r)));
    }
    ws.dec().check_degree(omega)?;
    require_projected(ws, omega)?;
    let dec = ws.dec();
    let p = omega.degree;
    let spec = ws.spectrum(p)?;
    let out = raising_steps(ws, omega, config)?;
    let f = gap_solve_deflated(dec, spec, &out.tilde)?.f;
    let u = out.v.minus(&f);
    let lap = dec.laplacian(p, &u.values);
    let diff: Vec<f64> = lap.iter().zip(&omega.values).map(|(a, b)| a - b).collect();
    let residual = relative(dec.norm(p, &diff), dec.norm(p, &omega.values));
    let t = sobolev_exponent(config.r, 2, ws.dim()).min(2.0);
    let a = &alpha.values;
    let sobolev_norm = dec.sobolev_norm_values(p, &u.values, &NormSpec::sobolev(config.r, 2).weighted(a, 1.0));
    let lt_norm = dec.lr_norm_values(p, &u.values, &NormSpec::lr(t).weighted(a, 1.0));
    let gamma = weight_integrability(ws.mesh(), alpha, config.r)?;
    Ok(PoissonSolution {
        u,
        residual,
        sobolev_norm,
        integrability_exponent: t,
        lt_norm,
        weight_integrability: gamma.value,
        trace: out.trace,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DualPoissonSolution {
    pub u: Cochain,
    pub residual: f64,
    /// r' = r/(r − 1).
    pub dual_exponent: f64,
    /// ‖u‖_{L^{r'}(M, w₀^r)}.
    pub weighted_norm: f64,
    /// ‖u‖_{W^{2,r'}} when the radius field is bounded below.
    pub sobolev_norm: Option<f64>,
}

/// u = U*φ with U the Poisson solution map ω ↦ v − Lω̃ and * the mass adjoint.
pub fn dual_poisson_solve(ws: &Workspace, phi: &Cochain, config: &RsmConfig) -> Result<DualPoissonSolution> {
    config.validate()?;
    if !(config.r < 2.0) {
        return Err(HodgeError::Domain(format!("the dual Poisson solve needs r < 2, got {}", config.r)));
    }
    ws.dec().check_degree(phi)?;
    require_projected(ws, phi)?;
    let dec = ws.dec();
    let p = phi.degree;
    let (k, _) = config.resolve_steps(ws.dim());
    let op = RsmOperator::new(ws, p, k, config.localization)?;
    let u = Cochain { degree: p, values: op.solve_adjoint(&phi.values)? };
    let lap = dec.laplacian(p, &u.values);
    let diff: Vec<f64> = lap.iter().zip(&phi.values).map(|(a, b)| a - b).collect();
    let residual = relative(dec.norm(p, &diff), dec.norm(p, &phi.values));
    let rp = config.r / (config.r - 1.0);
    let w0: Vec<f64> = ws.radius().radius.iter().map(|r| r.powi(-2 * k as i32)).collect();
    let weighted_norm = dec.lr_norm_values(p, &u.values, &NormSpec::lr(rp).weighted(&w0, config.r));
    let sobolev_norm =
        ws.bounded_radius().then(|| dec.sobolev_norm_values(p, &u.values, &NormSpec::sobolev(rp, 2)));
    Ok(DualPoissonSolution { u, residual, dual_exponent: rp, weighted_norm, sobolev_norm })
}

#[derive(Clone, Debug, Serialize)]
pub struct RouteAgreement {
    /// ‖Hω + Hω̃‖ / ‖Hω‖ (absolute when Hω = 0).
    pub relative_difference: f64,
    pub spectral_norm: f64,
}

/// Compares Hω with −Hω̃ from the raising steps.
pub fn projection_route_agreement(ws: &Workspace, omega: &Cochain, config: &RsmConfig) -> Result<RouteAgreement> {
    let dec = ws.dec();
    let spec = ws.spectrum(omega.degree)?;
    let direct = harmonic_projection(dec, spec, omega)?;
    let out = raising_steps(ws, omega, config)?;
    let via = harmonic_projection(dec, spec, &out.tilde)?;
    let sum = direct.plus(&via);
    let spectral_norm = dec.norm(omega.degree, &direct.values);
    let scale = spectral_norm.max(1e-300).max(f64::EPSILON * dec.norm(omega.degree, &omega.values));
    Ok(RouteAgreement { relative_difference: dec.norm(omega.degree, &sum.values) / scale, spectral_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_manifold, ManifoldKind};
    use crate::workspace::WorkspaceOptions;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus() -> Workspace {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 12, 0.0).unwrap();
        Workspace::new(m, WorkspaceOptions::default()).unwrap()
    }

    fn projected(ws: &Workspace, p: usize, seed: u64) -> Cochain {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Cochain::random(ws.mesh(), p, &mut rng);
        ws.spectrum(p).unwrap().deflate(ws.dec(), &mut x.values);
        x
    }

    #[test]
    fn poisson_solve_inverts_the_laplacian() {
        let ws = torus();
        let alpha = WeightField::constant(ws.mesh().num_vertices());
        let omega = projected(&ws, 1, 2);
        let sol = poisson_solve(&ws, &omega, &RsmConfig::new(1.5), &alpha).unwrap();
        assert!(sol.residual < 1e-9, "{}", sol.residual);
        assert!(sol.sobolev_norm.is_finite() && sol.lt_norm.is_finite());
        let zero = poisson_solve(&ws, &Cochain::zeros(ws.mesh(), 1), &RsmConfig::new(1.5), &alpha).unwrap();
        assert_eq!(zero.u.max_abs(), 0.0);
    }

    #[test]
    fn poisson_solve_rejects_harmonic_content() {
        let ws = torus();
        let alpha = WeightField::constant(ws.mesh().num_vertices());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let omega = Cochain::random(ws.mesh(), 1, &mut rng);
        let err = poisson_solve(&ws, &omega, &RsmConfig::new(1.5), &alpha).unwrap_err();
        assert!(matches!(err, HodgeError::ProjectFirst { .. }));
    }

    #[test]
    fn dual_solution_differs_from_primal_by_a_harmonic() {
        let ws = torus();
        let alpha = WeightField::constant(ws.mesh().num_vertices());
        let phi = projected(&ws, 0, 8);
        let cfg = RsmConfig::new(1.5);
        let dual = dual_poisson_solve(&ws, &phi, &cfg).unwrap();
        assert!(dual.residual < 1e-8, "{}", dual.residual);
        let primal = poisson_solve(&ws, &phi, &cfg, &alpha).unwrap();
        let diff = dual.u.minus(&primal.u);
        let lap = ws.dec().laplacian(0, &diff.values);
        assert!(ws.dec().norm(0, &lap) < 1e-8 * ws.dec().norm(0, &phi.values));
    }

    #[test]
    fn operator_adjoint_matches_mass_pairing() {
        let ws = torus();
        for p in [0, 1] {
            let op = RsmOperator::new(&ws, p, 2, crate::rsm::Localization::Restrict).unwrap();
            let a = projected(&ws, p, 10 + p as u64);
            let b = projected(&ws, p, 20 + p as u64);
            let lhs = ws.dec().inner(p, &op.solve(&a.values).unwrap(), &b.values);
            let rhs = ws.dec().inner(p, &a.values, &op.solve_adjoint(&b.values).unwrap());
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()), "p={p}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn operator_apply_matches_raising_steps() {
        let ws = torus();
        let omega = projected(&ws, 1, 31);
        let cfg = RsmConfig::new(1.5);
        let out = raising_steps(&ws, &omega, &cfg).unwrap();
        let op = RsmOperator::new(&ws, 1, out.trace.steps, cfg.localization).unwrap();
        let (v, tilde) = op.apply(&omega.values).unwrap();
        let dec = ws.dec();
        let vn = dec.norm(1, &out.v.values);
        assert!(dec.norm(1, &crate::linalg::sub(&v, &out.v.values)) <= 1e-10 * vn);
        assert!(dec.norm(1, &crate::linalg::sub(&tilde, &out.tilde.values)) <= 1e-10 * dec.norm(1, &omega.values));
    }

    #[test]
    fn routes_to_the_harmonic_part_agree() {
        let ws = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let omega = Cochain::random(ws.mesh(), 1, &mut rng);
        let agree = projection_route_agreement(&ws, &omega, &RsmConfig::new(1.5)).unwrap();
        assert!(agree.relative_difference < 1e-8, "{}", agree.relative_difference);
    }
}
