//! Twisted Calderón–Zygmund inequality with measured constants:
//! ‖u‖_{W^{2,r}(w)} ≤ C₁‖u‖_{L^r(w w₀^r)} + C₂‖Δu‖_{L^r(w)}, w₀ = R^{−2}.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covering::WeightField;
use crate::dec::{sobolev_exponent, Cochain, NormSpec};
use crate::error::{HodgeError, Result};
use crate::linalg::{norm2, pcg, CgSettings, CsrMatrix};
use crate::par;
use crate::workspace::Workspace;

#[derive(Clone, Debug, Serialize)]
pub struct CziSettings {
    pub r: f64,
    pub samples: usize,
    pub held_out: usize,
    pub seed: u64,
    /// Smoothing scales τ are log-uniform in this range.
    pub tau_range: (f64, f64),
    /// Drop w₀ (classical inequality); only meaningful for a bounded radius.
    pub classical: bool,
}

impl Default for CziSettings {
    fn default() -> Self {
        CziSettings { r: 1.5, samples: 50, held_out: 50, seed: 7, tau_range: (1e-3, 1e-1), classical: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CziSample {
    /// ‖u‖_{W^{2,r}(w)}.
    pub lhs: f64,
    /// ‖u‖_{L^r(w w₀^r)}, or ‖u‖_{L^r(w)} in classical mode.
    pub term1: f64,
    /// ‖Δu‖_{L^r(w)}.
    pub term2: f64,
    /// ‖u‖_{L^t(w^t)} and ‖u‖_{W^{2,r}(w^r w₀^t)} for t = S_2(r) when finite.
    pub moreover: Option<(f64, f64)>,
}

pub fn weighted_czi_verify(ws: &Workspace, u: &Cochain, r: f64, w: &WeightField, classical: bool) -> Result<CziSample> {
    let dec = ws.dec();
    dec.check_degree(u)?;
    if !(r > 1.0) || !r.is_finite() {
        return Err(HodgeError::Domain(format!("CZI exponent must lie in (1, ∞), got {r}")));
    }
    let p = u.degree;
    let radius = &ws.radius().radius;
    let lhs = dec.sobolev_norm_values(p, &u.values, &NormSpec::sobolev(r, 2).weighted(&w.values, 1.0));
    let twisted: Vec<f64> = if classical {
        w.values.clone()
    } else {
        w.values.iter().zip(radius).map(|(w, rr)| w * rr.powf(-2.0 * r)).collect()
    };
    let term1 = dec.lr_norm_values(p, &u.values, &NormSpec::lr(r).weighted(&twisted, 1.0));
    let lap = dec.laplacian(p, &u.values);
    let term2 = dec.lr_norm_values(p, &lap, &NormSpec::lr(r).weighted(&w.values, 1.0));
    let t = sobolev_exponent(r, 2, ws.dim());
    let moreover = t.is_finite().then(|| {
        let left = dec.lr_norm_values(p, &u.values, &NormSpec::lr(t).weighted(&w.values, t));
        let mixed: Vec<f64> = w.values.iter().zip(radius).map(|(w, rr)| w.powf(r) * rr.powf(-2.0 * t)).collect();
        let right = dec.sobolev_norm_values(p, &u.values, &NormSpec::sobolev(r, 2).weighted(&mixed, 1.0));
        (left, right)
    });
    Ok(CziSample { lhs, term1, term2, moreover })
}

/// (I + τΔ)^{−2} ξ for white noise ξ and τ log-uniform in `tau_range`.
pub fn sample_smooth_forms(ws: &Workspace, p: usize, count: usize, tau_range: (f64, f64), seed: u64) -> Result<Vec<Cochain>> {
    let dec = ws.dec();
    let mass = dec.mass(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (tau_range.0.ln(), tau_range.1.ln());
    let draws: Vec<(f64, Cochain)> = (0..count)
        .map(|_| {
            let tau = if hi > lo { rng.random_range(lo..hi).exp() } else { lo.exp() };
            (tau, Cochain::random(ws.mesh(), p, &mut rng))
        })
        .collect();
    par::try_map_range(count, |i| {
        let (tau, xi) = &draws[i];
        let a = CsrMatrix::diagonal(mass).add(dec.stiffness(p), *tau);
        let mut x = xi.values.clone();
        for _ in 0..2 {
            let b: Vec<f64> = x.iter().zip(mass).map(|(x, m)| x * m).collect();
            let bn = norm2(&b);
            let out = pcg(&a, &b, &CgSettings { tol: 1e-12, max_iter: 20 * b.len().max(100) }, None::<fn(&mut [f64])>, |r| {
                norm2(r) / bn
            });
            if !out.converged {
                return Err(HodgeError::Stagnation { residual: out.residual, iterations: out.iterations });
            }
            x = out.x;
        }
        let scale = dec.norm(p, &x);
        Ok(Cochain { degree: p, values: x.iter().map(|v| v / scale).collect() })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CziFit {
    pub c1: f64,
    pub c2: f64,
    /// Smallest (C₁a + C₂b − l)/l over the fitted samples.
    pub min_margin: f64,
}

impl CziFit {
    pub fn margin(&self, s: &CziSample) -> f64 {
        if s.lhs == 0.0 {
            return 0.0;
        }
        (self.c1 * s.term1 + self.c2 * s.term2 - s.lhs) / s.lhs
    }

    pub fn to_csv(&self) -> String {
        format!("c1,c2,min_margin\n{:e},{:e},{:e}\n", self.c1, self.c2, self.min_margin)
    }
}

/// Nonnegative (C₁, C₂) minimizing Σ (C₁a_i + C₂b_i)/l_i subject to
/// C₁a_i + C₂b_i ≥ l_i, by enumerating vertices of the feasible polygon.
pub fn fit_constants(samples: &[CziSample]) -> Result<CziFit> {
    let rows: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.lhs > 0.0)
        .map(|s| (s.term1 / s.lhs, s.term2 / s.lhs))
        .collect();
    if rows.is_empty() {
        return Ok(CziFit { c1: 0.0, c2: 0.0, min_margin: 0.0 });
    }
    if rows.iter().any(|&(a, b)| a == 0.0 && b == 0.0) {
        return Err(HodgeError::Domain("sample with nonzero lhs and vanishing right-hand terms".into()));
    }
    let (sa, sb) = rows.iter().fold((0.0, 0.0), |(x, y), &(a, b)| (x + a, y + b));
    let feasible = |c1: f64, c2: f64| c1 >= 0.0 && c2 >= 0.0 && rows.iter().all(|&(a, b)| c1 * a + c2 * b >= 1.0 - 1e-12);
    let mut candidates = Vec::new();
    // intersections with the axes
    for &(a, b) in &rows {
        if a > 0.0 {
            candidates.push((1.0 / a, 0.0));
        }
        if b > 0.0 {
            candidates.push((0.0, 1.0 / b));
        }
    }
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a1, b1) = rows[i];
            let (a2, b2) = rows[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() > 1e-14 * (a1.abs() + b1.abs()) * (a2.abs() + b2.abs()) {
                candidates.push(((b2 - b1) / det, (a1 - a2) / det));
            }
        }
    }
    let best = candidates
        .into_iter()
        .filter(|&(c1, c2)| feasible(c1, c2))
        .min_by(|x, y| (x.0 * sa + x.1 * sb).total_cmp(&(y.0 * sa + y.1 * sb)))
        .ok_or_else(|| HodgeError::Domain("no feasible CZI constants".into()))?;
    // lift by roundoff so every fitted sample satisfies the inequality exactly
    let lift = rows.iter().map(|&(a, b)| 1.0 / (best.0 * a + best.1 * b)).fold(1.0, f64::max);
    let mut fit = CziFit { c1: best.0 * lift, c2: best.1 * lift, min_margin: 0.0 };
    fit.min_margin = samples.iter().filter(|s| s.lhs > 0.0).map(|s| fit.margin(s)).fold(f64::INFINITY, f64::min);
    Ok(fit)
}

#[derive(Clone, Debug, Serialize)]
pub struct CziStudy {
    pub degree: usize,
    pub classical: bool,
    pub fit: CziFit,
    /// Smallest relative margin on the held-out samples.
    pub held_out_margin: f64,
    pub held_out_holds: bool,
    /// max ‖u‖_{L^t(w^t)} / ‖u‖_{W^{2,r}(w^r w₀^t)}, when S_2(r) is finite.
    pub moreover_constant: Option<f64>,
    pub fit_samples: usize,
}

/// Fits (C₁, C₂) on smooth random forms plus harmonic probes and checks them
/// on a held-out set drawn with a different seed.
pub fn czi_study(ws: &Workspace, p: usize, w: &WeightField, settings: &CziSettings) -> Result<CziStudy> {
    let classical = settings.classical && ws.bounded_radius();
    if settings.classical && !classical {
        log::warn!("classical CZI mode needs a radius field bounded below; using the twisted form");
    }
    let eval = |forms: &[Cochain]| -> Result<Vec<CziSample>> {
        forms.iter().map(|u| weighted_czi_verify(ws, u, settings.r, w, classical)).collect()
    };
    let mut fit_forms = sample_smooth_forms(ws, p, settings.samples, settings.tau_range, settings.seed)?;
    fit_forms.extend(ws.spectrum(p)?.harmonic_basis());
    let fitted = eval(&fit_forms)?;
    let fit = fit_constants(&fitted)?;
    let held = eval(&sample_smooth_forms(ws, p, settings.held_out, settings.tau_range, settings.seed ^ 0x5eed)?)?;
    let held_out_margin = held.iter().filter(|s| s.lhs > 0.0).map(|s| fit.margin(s)).fold(f64::INFINITY, f64::min);
    let moreover_constant = fitted
        .iter()
        .chain(&held)
        .filter_map(|s| s.moreover)
        .map(|(l, r)| if r > 0.0 { l / r } else { 0.0 })
        .reduce(f64::max);
    if moreover_constant.is_none() {
        log::info!("S_2({}) is infinite in dimension {}; embedding clause skipped", settings.r, ws.dim());
    }
    Ok(CziStudy {
        degree: p,
        classical,
        fit,
        held_out_margin,
        held_out_holds: held_out_margin >= 0.0,
        moreover_constant,
        fit_samples: fitted.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_manifold, ManifoldKind};
    use crate::workspace::WorkspaceOptions;

    fn sample(lhs: f64, term1: f64, term2: f64) -> CziSample {
        CziSample { lhs, term1, term2, moreover: None }
    }

    #[test]
    fn fit_is_feasible_and_tight() {
        let s = vec![sample(1.0, 1.0, 0.0), sample(1.0, 0.0, 1.0), sample(2.0, 1.0, 1.0)];
        let fit = fit_constants(&s).unwrap();
        assert!((fit.c1 - 1.0).abs() < 1e-12 && (fit.c2 - 1.0).abs() < 1e-12, "{fit:?}");
        assert!(fit.min_margin >= 0.0 && fit.min_margin < 1e-12);
    }

    #[test]
    fn zero_form_gives_zero_terms() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        let ws = Workspace::new(m, WorkspaceOptions::default()).unwrap();
        let w = WeightField::constant(ws.mesh().num_vertices());
        let s = weighted_czi_verify(&ws, &Cochain::zeros(ws.mesh(), 1), 1.5, &w, false).unwrap();
        assert_eq!((s.lhs, s.term1, s.term2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn harmonic_form_has_no_laplacian_term() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        let ws = Workspace::new(m, WorkspaceOptions::default()).unwrap();
        let w = WeightField::constant(ws.mesh().num_vertices());
        let h = ws.spectrum(1).unwrap().harmonic_basis()[0].clone();
        let s = weighted_czi_verify(&ws, &h, 1.5, &w, false).unwrap();
        assert!(s.term2 < 1e-6 * s.term1);
        // w₀ = R^{-2} ≥ 1, so the twisted term dominates the plain L^r norm
        let plain = weighted_czi_verify(&ws, &h, 1.5, &w, true).unwrap();
        assert!(s.term1 >= plain.term1);
    }
}
