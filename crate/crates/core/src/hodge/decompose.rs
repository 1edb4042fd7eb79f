//! Strong and weak (closure) Hodge decompositions with orthogonality tables.

use serde::Serialize;

use crate::covering::WeightField;
use crate::dec::{Cochain, Dec, NormSpec};
use crate::error::{HodgeError, Result};
use crate::rsm::{raising_steps, RsmConfig, RsmTrace};
use crate::spectral::{gap_solve_deflated, harmonic_projection, SpectrumReport};
use crate::workspace::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMode {
    /// ω = h + Δu.
    Laplacian,
    /// ω = h + dμ + d*ν.
    DDstar,
}

impl DecompositionMode {
    fn tag(self, weak: bool) -> &'static str {
        match (self, weak) {
            (DecompositionMode::Laplacian, false) => "strong_laplacian",
            (DecompositionMode::DDstar, false) => "strong_d_dstar",
            (DecompositionMode::Laplacian, true) => "weak_laplacian_closure",
            (DecompositionMode::DDstar, true) => "weak_d_dstar_closure",
        }
    }
}

/// Pairwise mass inner products normalized by norm products.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct OrthogonalityTable {
    pub harmonic_exact: f64,
    pub harmonic_coexact: f64,
    pub exact_coexact: f64,
}

impl OrthogonalityTable {
    pub fn max(&self) -> f64 {
        self.harmonic_exact.abs().max(self.harmonic_coexact.abs()).max(self.exact_coexact.abs())
    }

    pub fn to_csv(&self) -> String {
        format!(
            "pair,value\nharmonic_exact,{:e}\nharmonic_coexact,{:e}\nexact_coexact,{:e}\n",
            self.harmonic_exact, self.harmonic_coexact, self.exact_coexact
        )
    }
}

fn normalized_inner(dec: &Dec, p: usize, a: &[f64], b: &[f64]) -> f64 {
    let na = dec.norm(p, a);
    let nb = dec.norm(p, b);
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dec.inner(p, a, b) / (na * nb)
    }
}

pub fn orthogonality_check(dec: &Dec, h: &Cochain, exact: &Cochain, coexact: &Cochain) -> OrthogonalityTable {
    let p = h.degree;
    OrthogonalityTable {
        harmonic_exact: normalized_inner(dec, p, &h.values, &exact.values),
        harmonic_coexact: normalized_inner(dec, p, &h.values, &coexact.values),
        exact_coexact: normalized_inner(dec, p, &exact.values, &coexact.values),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HodgeDecomposition {
    pub mode: String,
    pub degree: usize,
    pub input_norm: f64,
    pub harmonic: Cochain,
    /// Δu, or dμ in d/d* mode.
    pub exact: Cochain,
    /// d*ν in d/d* mode, zero otherwise.
    pub coexact: Cochain,
    pub u: Cochain,
    /// μ = d*u and ν = du.
    pub mu: Option<Cochain>,
    pub nu: Option<Cochain>,
    /// Part of ω left outside the decomposition (weak modes only).
    pub remainder: Option<Cochain>,
    /// ‖ω − h − exact − coexact − remainder‖ / ‖ω‖.
    pub residual: f64,
    pub orthogonality: OrthogonalityTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<RsmTrace>,
}

impl HodgeDecomposition {
    pub fn norms(&self, dec: &Dec) -> [f64; 3] {
        let p = self.degree;
        [dec.norm(p, &self.harmonic.values), dec.norm(p, &self.exact.values), dec.norm(p, &self.coexact.values)]
    }
}

/// h and u with ω = h + Δu.
struct Parts {
    h: Cochain,
    u: Cochain,
    trace: Option<RsmTrace>,
}

/// Raising steps at exponent below 2, the gap inverse alone at 2, and the
/// dual exponent above 2 (bounded radius only).
fn laplacian_parts(ws: &Workspace, omega: &Cochain, config: &RsmConfig) -> Result<Parts> {
    let dec = ws.dec();
    let spec = ws.spectrum(omega.degree)?;
    let r = config.r;
    if !(r > 1.0) || !r.is_finite() {
        return Err(HodgeError::Domain(format!("decomposition exponent must lie in (1, ∞), got {r}")));
    }
    if r == 2.0 {
        let h = harmonic_projection(dec, spec, omega)?;
        let u = gap_solve_deflated(dec, spec, omega)?.f;
        return Ok(Parts { h, u, trace: None });
    }
    let cfg = if r > 2.0 {
        if !ws.bounded_radius() {
            return Err(HodgeError::NotApplicable(format!(
                "exponent {r} > 2 needs a radius field bounded below (min R ≥ 0.25 max R)"
            )));
        }
        RsmConfig { r: r / (r - 1.0), ..config.clone() }
    } else {
        config.clone()
    };
    let out = raising_steps(ws, omega, &cfg)?;
    let h = harmonic_projection(dec, spec, &out.tilde)?.scaled(-1.0);
    let f = gap_solve_deflated(dec, spec, &out.tilde)?.f;
    Ok(Parts { h, u: out.v.minus(&f), trace: Some(out.trace) })
}

fn assemble(
    dec: &Dec,
    omega: &Cochain,
    parts: Parts,
    mode: DecompositionMode,
    remainder: Option<Cochain>,
    weak: bool,
) -> HodgeDecomposition {
    let p = omega.degree;
    let Parts { h, u, trace } = parts;
    let mu = Cochain { degree: p, values: dec.dstar(p, &u.values) };
    let nu = Cochain { degree: p, values: dec.d(p, &u.values) };
    let d_mu = Cochain { degree: p, values: dec.d_dstar(p, &u.values) };
    let ds_nu = Cochain { degree: p, values: dec.dstar_d(p, &u.values) };
    let orthogonality = orthogonality_check(dec, &h, &d_mu, &ds_nu);
    let (exact, coexact, mu, nu) = match mode {
        DecompositionMode::Laplacian => (d_mu.plus(&ds_nu), Cochain { degree: p, values: vec![0.0; u.len()] }, None, None),
        DecompositionMode::DDstar => (d_mu, ds_nu, Some(mu), Some(nu)),
    };
    let mut rest = omega.minus(&h).minus(&exact).minus(&coexact);
    if let Some(e) = &remainder {
        rest = rest.minus(e);
    }
    let input_norm = dec.norm(p, &omega.values);
    let rn = dec.norm(p, &rest.values);
    let residual = if input_norm > 0.0 { rn / input_norm } else { rn };
    HodgeDecomposition {
        mode: mode.tag(weak).to_string(),
        degree: p,
        input_norm,
        harmonic: h,
        exact,
        coexact,
        u,
        mu,
        nu,
        remainder,
        residual,
        orthogonality,
        trace,
    }
}

/// ω = h + Δu (or h + dμ + d*ν) with h = −Hω̃ and u = v − Lω̃.
pub fn strong_decomposition(
    ws: &Workspace,
    omega: &Cochain,
    config: &RsmConfig,
    mode: DecompositionMode,
) -> Result<HodgeDecomposition> {
    ws.dec().check_degree(omega)?;
    let parts = laplacian_parts(ws, omega, config)?;
    Ok(assemble(ws.dec(), omega, parts, mode, None, false))
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakSettings {
    /// Center of the truncation ball.
    pub base_vertex: usize,
    /// First target as a fraction of ‖ω‖_{L^r(α)}.
    pub initial_fraction: f64,
    pub halvings: usize,
}

impl Default for WeakSettings {
    fn default() -> Self {
        WeakSettings { base_vertex: 0, initial_fraction: 0.5, halvings: 3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakLevel {
    pub target: f64,
    /// ‖E_ε‖_{L^r(α)}.
    pub error_norm: f64,
    /// Geodesic radius of the truncation ball.
    pub truncation_radius: f64,
    pub support_simplices: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakDecomposition {
    pub levels: Vec<WeakLevel>,
    pub strictly_decreasing: bool,
    /// Decomposition at the smallest target, with E_ε as the remainder.
    pub finest: HodgeDecomposition,
}

/// Distance of each p-simplex from the base: its farthest vertex.
fn simplex_distances(ws: &Workspace, p: usize, base: usize) -> Vec<f64> {
    let m = ws.mesh();
    let dist = m.geodesic_distance(base);
    (0..m.count(p)).map(|i| m.simplex(p, i).iter().map(|&v| dist[v]).fold(0.0, f64::max)).collect()
}

/// Shortest prefix (in distance order) of the harmonic-free part g whose
/// truncation error (I − H)(g − g_prefix) has L^r(α) norm ≤ target.
fn minimal_prefix(
    dec: &Dec,
    spec: &SpectrumReport,
    g: &[f64],
    order: &[usize],
    spec_norm: &NormSpec<'_>,
    target: f64,
) -> (usize, Vec<f64>, f64) {
    let p = spec.degree;
    let mass = dec.mass(p);
    let mut tail = g.to_vec();
    // ⟨tail, h_i⟩ updated as simplices move into the prefix
    let mut coeffs: Vec<f64> = spec.basis.iter().map(|h| dec.inner(p, &tail, h)).collect();
    let error = |tail: &[f64], coeffs: &[f64]| -> Vec<f64> {
        let mut e = tail.to_vec();
        for (c, h) in coeffs.iter().zip(&spec.basis) {
            for (x, y) in e.iter_mut().zip(h) {
                *x -= c * y;
            }
        }
        e
    };
    for count in 0..=order.len() {
        if count > 0 {
            let i = order[count - 1];
            for (c, h) in coeffs.iter_mut().zip(&spec.basis) {
                *c -= mass[i] * tail[i] * h[i];
            }
            tail[i] = 0.0;
            if g[i] == 0.0 && count < order.len() {
                continue;
            }
        }
        let e = error(&tail, &coeffs);
        let norm = dec.lr_norm_values(p, &e, spec_norm);
        if norm <= target || count == order.len() {
            return (count, e, norm);
        }
    }
    unreachable!("the full prefix always terminates the scan")
}

/// ω = Hω + Δu_ε + E_ε where ω_ε is ω − Hω truncated to a geodesic ball and
/// E_ε = (I − H)(ω − Hω − ω_ε); the ball grows until ‖E_ε‖_{L^r(α)} meets each
/// target in a halving sequence.
pub fn weak_decomposition(
    ws: &Workspace,
    omega: &Cochain,
    config: &RsmConfig,
    alpha: &WeightField,
    mode: DecompositionMode,
    settings: &WeakSettings,
) -> Result<WeakDecomposition> {
    let dec = ws.dec();
    dec.check_degree(omega)?;
    let p = omega.degree;
    if settings.base_vertex >= ws.mesh().num_vertices() {
        return Err(HodgeError::InvalidVertex { vertex: settings.base_vertex, count: ws.mesh().num_vertices() });
    }
    let lr = if config.r.is_finite() && config.r >= 1.0 { config.r } else { 2.0 };
    let norm_spec = NormSpec::lr(lr).weighted(&alpha.values, 1.0);
    let spec = ws.spectrum(p)?;
    let h = harmonic_projection(dec, spec, omega)?;
    let g = omega.minus(&h);
    let dist = simplex_distances(ws, p, settings.base_vertex);
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));

    let mut target = settings.initial_fraction * dec.lr_norm_values(p, &omega.values, &norm_spec);
    let mut levels = Vec::with_capacity(settings.halvings + 1);
    let mut last = None;
    for _ in 0..=settings.halvings {
        let (count, e, norm) = minimal_prefix(dec, spec, &g.values, &order, &norm_spec, target);
        let truncation_radius = if count == 0 { 0.0 } else { dist[order[count - 1]] };
        levels.push(WeakLevel { target, error_norm: norm, truncation_radius, support_simplices: count });
        last = Some((count, e));
        target *= 0.5;
    }
    let strictly_decreasing = levels.windows(2).all(|w| w[1].error_norm < w[0].error_norm || w[0].error_norm == 0.0);
    if !strictly_decreasing {
        log::warn!("truncation error did not decrease strictly across target halvings");
    }
    let (count, e) = last.expect("at least one level");
    let mut truncated = vec![0.0; g.len()];
    for &i in &order[..count] {
        truncated[i] = g.values[i];
    }
    let truncated = Cochain { degree: p, values: truncated };
    let parts = laplacian_parts(ws, &truncated, config)?;
    // Hω_ε is cancelled by H(g − ω_ε) inside E_ε, so the harmonic part is Hω
    let parts = Parts { h: h.clone(), u: parts.u, trace: parts.trace };
    let finest = assemble(dec, omega, parts, mode, Some(Cochain { degree: p, values: e }), true);
    Ok(WeakDecomposition { levels, strictly_decreasing, finest })
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

    #[test]
    fn strong_modes_reconstruct_and_are_orthogonal() {
        let ws = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let omega = Cochain::random(ws.mesh(), 1, &mut rng);
        for mode in [DecompositionMode::Laplacian, DecompositionMode::DDstar] {
            let d = strong_decomposition(&ws, &omega, &RsmConfig::new(1.5), mode).unwrap();
            assert!(d.residual < 1e-8, "{mode:?} residual {}", d.residual);
            assert!(d.orthogonality.max() < 1e-8, "{:?}", d.orthogonality);
        }
    }

    #[test]
    fn harmonic_input_is_its_own_harmonic_part() {
        let ws = torus();
        let h = ws.spectrum(1).unwrap().harmonic_basis()[0].clone();
        let d = strong_decomposition(&ws, &h, &RsmConfig::new(1.5), DecompositionMode::Laplacian).unwrap();
        let dec = ws.dec();
        assert!(dec.norm(1, &d.harmonic.minus(&h).values) < 1e-9);
        assert!(dec.norm(1, &d.exact.values) < 1e-9);
    }

    #[test]
    fn laplacian_input_has_no_harmonic_part() {
        let ws = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = Cochain::random(ws.mesh(), 1, &mut rng);
        let omega = Cochain { degree: 1, values: ws.dec().laplacian(1, &psi.values) };
        let d = strong_decomposition(&ws, &omega, &RsmConfig::new(2.0), DecompositionMode::DDstar).unwrap();
        let dec = ws.dec();
        assert!(dec.norm(1, &d.harmonic.values) <= 1e-9 * dec.norm(1, &omega.values));
        assert!(d.residual < 1e-8);
    }

    #[test]
    fn orthogonality_of_zero_harmonic_is_zero() {
        let ws = torus();
        let z = Cochain::zeros(ws.mesh(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Cochain::random(ws.mesh(), 1, &mut rng);
        let t = orthogonality_check(ws.dec(), &z, &a, &a);
        assert_eq!(t.harmonic_exact, 0.0);
        assert_eq!(t.harmonic_coexact, 0.0);
    }

    #[test]
    fn large_exponent_needs_bounded_radius_or_runs() {
        let ws = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let omega = Cochain::random(ws.mesh(), 0, &mut rng);
        let out = strong_decomposition(&ws, &omega, &RsmConfig::new(3.0), DecompositionMode::Laplacian);
        if ws.bounded_radius() {
            assert!(out.unwrap().residual < 1e-8);
        } else {
            assert!(matches!(out, Err(HodgeError::NotApplicable(_))));
        }
    }

    #[test]
    fn weak_errors_decrease_and_vanish_on_harmonics() {
        let ws = torus();
        let alpha = WeightField::constant(ws.mesh().num_vertices());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let omega = Cochain::random(ws.mesh(), 1, &mut rng);
        let cfg = RsmConfig::new(1.5);
        let w = weak_decomposition(&ws, &omega, &cfg, &alpha, DecompositionMode::Laplacian, &WeakSettings::default()).unwrap();
        assert!(w.strictly_decreasing, "{:?}", w.levels);
        assert!(w.finest.residual < 1e-8);
        for l in &w.levels {
            assert!(l.error_norm <= l.target);
        }
        let h = ws.spectrum(1).unwrap().harmonic_basis()[1].clone();
        let w = weak_decomposition(&ws, &h, &cfg, &alpha, DecompositionMode::DDstar, &WeakSettings::default()).unwrap();
        assert!(w.levels.iter().all(|l| l.error_norm < 1e-12));
        assert!(ws.dec().norm(1, &w.finest.harmonic.minus(&h).values) < 1e-12);
    }
}
