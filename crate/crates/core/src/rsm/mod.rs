//! Raising steps: local Dirichlet solves glued by the partition of unity,
//! iterated on the gluing residual.

mod ledger;
mod operator;
mod support;

pub use ledger::{LedgerCheck, LedgerInputs};
pub use operator::RsmOperator;
pub use support::{compact_support_check, SupportCheck};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::covering::{check_weight_relative, WeightField};
use crate::dec::{sobolev_exponent, threshold_steps, Cochain, Dec, NormSpec};
use crate::error::{HodgeError, Result};
use crate::local::dirichlet_diagnostics;
use crate::par;
use crate::spectral::gap_solve_deflated;
use crate::workspace::Workspace;

pub const MAX_STEPS: usize = 8;

/// Right-hand side handed to each ball.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Localization {
    /// ω restricted to the ball interior.
    #[default]
    Restrict,
    /// χ_j ω.
    Partition,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RsmConfig {
    pub r: f64,
    pub s: f64,
    /// None: smallest k with S_k(r) ≥ s, capped at 8.
    pub steps: Option<usize>,
    /// Base weight w per vertex; None is the constant 1.
    pub weight: Option<Vec<f64>>,
    pub localization: Localization,
}

impl RsmConfig {
    pub fn new(r: f64) -> Self {
        RsmConfig { r, s: 2.0, steps: None, weight: None, localization: Localization::Restrict }
    }
    pub fn with_steps(mut self, k: usize) -> Self {
        self.steps = Some(k);
        self
    }
    pub fn with_target(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 1.0 && self.r <= 2.0) {
            return Err(HodgeError::Domain(format!("r must lie in (1, 2], got {}", self.r)));
        }
        if !(self.s >= self.r) {
            return Err(HodgeError::Domain(format!("target s = {} below r = {}", self.s, self.r)));
        }
        if let Some(w) = &self.weight {
            if w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(HodgeError::Domain("weights must be positive and finite".into()));
            }
        }
        Ok(())
    }

    /// (k, capped).
    pub fn resolve_steps(&self, n: usize) -> (usize, bool) {
        match self.steps {
            Some(k) => (k, false),
            None => {
                let k = threshold_steps(self.r, self.s, n);
                (k.min(MAX_STEPS), k > MAX_STEPS)
            }
        }
    }
}

/// χ̄ x: each p-simplex value scaled by the vertex mean of χ.
pub fn multiply_by_function(dec: &Dec, p: usize, chi: &[f64], x: &[f64]) -> Vec<f64> {
    let m = dec.mesh();
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let s = m.simplex(p, i);
            v * s.iter().map(|&a| chi[a]).sum::<f64>() / s.len() as f64
        })
        .collect()
}

/// B(χ, u) = Δ(χu) − χΔu.
pub fn commutator_defect(dec: &Dec, chi: &[f64], u: &Cochain) -> Cochain {
    let p = u.degree;
    let a = dec.laplacian(p, &multiply_by_function(dec, p, chi, &u.values));
    let b = multiply_by_function(dec, p, chi, &dec.laplacian(p, &u.values));
    Cochain { degree: p, values: a.iter().zip(&b).map(|(x, y)| x - y).collect() }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorBound {
    pub simplices: usize,
    pub violations: usize,
    /// max |B|(σ) / bound(σ) over simplices with a nonzero bound.
    pub worst_ratio: f64,
}

/// Pointwise check of |B|(σ) ≤ (|Δχ||u| + 2C_χ|∇χ||∇u|)(σ)·1.5, each factor
/// taken as its largest value over the simplices sharing a vertex with σ.
pub fn commutator_bound_check(dec: &Dec, chi: &[f64], c_chi: f64, u: &Cochain) -> CommutatorBound {
    let m = dec.mesh();
    let p = u.degree;
    let b = dec.density(p, &commutator_defect(dec, chi, u).values);
    let ud = dec.density(p, &u.values);
    let gd = dec.gradient_density(p, &u.values);
    let m0 = m.mass(0);
    let m1 = m.mass(1);
    let lap_chi: Vec<f64> = (0..m.num_vertices())
        .map(|v| m.neighbors(v).iter().map(|&(w, e)| m1[e] * (chi[v] - chi[w])).sum::<f64>().abs() / m0[v])
        .collect();
    let grad_chi: Vec<f64> = (0..m.num_vertices())
        .map(|v| m.neighbors(v).iter().map(|&(w, e)| (chi[v] - chi[w]).abs() / m.edge_length(e)).fold(0.0, f64::max))
        .collect();
    // largest value of a p-simplex field over simplices meeting each vertex
    let vertex_max = |field: &[f64]| {
        let mut out = vec![0.0f64; m.num_vertices()];
        for (i, &f) in field.iter().enumerate() {
            for &v in m.simplex(p, i) {
                out[v] = out[v].max(f);
            }
        }
        out
    };
    let u_near = vertex_max(&ud);
    let g_near = vertex_max(&gd);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for (i, &bi) in b.iter().enumerate() {
        let s = m.simplex(p, i);
        let ring = |f: &[f64]| {
            s.iter()
                .flat_map(|&v| std::iter::once(v).chain(m.neighbors(v).iter().map(|&(w, _)| w)))
                .map(|v| f[v])
                .fold(0.0, f64::max)
        };
        let bound = 1.5 * (ring(&lap_chi) * ring(&u_near) + 2.0 * c_chi * ring(&grad_chi) * ring(&g_near));
        if bound > 0.0 {
            worst = worst.max(bi / bound);
        }
        if bi > bound * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    CommutatorBound { simplices: b.len(), violations, worst_ratio: worst }
}

#[derive(Clone, Debug, Serialize)]
pub struct BallDiagnostics {
    pub ball: usize,
    /// ‖u_j‖_{W^{2,r}(B_j)} / ‖ω‖_{L^r(B_j)}.
    pub constant: f64,
    pub residual: f64,
    /// Whole-manifold ball, solved by the spectral-gap inverse.
    pub closed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub balls: Vec<BallDiagnostics>,
    pub max_constant: f64,
    pub median_constant: f64,
    /// ‖Σ_j B(χ_j, u_j) − ω_next‖ / ‖ω_next‖ in the mass norm.
    pub defect_deviation: f64,
    pub ledger: Vec<LedgerCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepOutcome {
    pub v: Cochain,
    /// ω_next = Δv − ω.
    pub next: Cochain,
    pub diagnostics: StepDiagnostics,
}

/// One gluing step: u_j from the ball solves, v = Σ χ_j u_j, ω_next = Δv − ω.
/// `weight` is the per-vertex weight the ledger inequalities are evaluated
/// with; `exponents` the values of s they are checked at.
pub fn rsm_step(
    ws: &Workspace,
    omega: &Cochain,
    r: f64,
    weight: &[f64],
    localization: Localization,
    exponents: &[f64],
) -> Result<StepOutcome> {
    let dec = ws.dec();
    dec.check_degree(omega)?;
    let p = omega.degree;
    let cov = ws.covering();
    let part = ws.partition();
    let solver = ws.local_solver(p)?;
    let nv = dec.mesh().num_vertices();
    let needs_spectrum = solver.operators.iter().any(|o| !o.is_well_posed());
    let spec = if needs_spectrum { Some(ws.spectrum(p)?) } else { None };

    let solved: Vec<(Cochain, BallDiagnostics)> = par::try_map_range(cov.len(), |j| {
        let patch = &solver.patches[j];
        let rhs = match localization {
            Localization::Restrict => patch.extend(p, &patch.restrict(omega)),
            Localization::Partition => {
                let chi = part.column_dense(j, nv);
                let local = Cochain { degree: p, values: multiply_by_function(dec, p, &chi, &omega.values) };
                patch.extend(p, &patch.restrict(&local))
            }
        };
        let closed = !solver.operators[j].is_well_posed();
        let u = if closed {
            gap_solve_deflated(dec, spec.expect("spectrum for closed ball"), &rhs)?.f
        } else {
            solver.solve(dec, j, &rhs).map_err(|e| HodgeError::Ball { ball: j, message: e.to_string() })?
        };
        let (constant, residual) = if closed {
            let w2 = dec.sobolev_norm_values(p, &u.values, &NormSpec::sobolev(r, 2));
            let l = dec.lr_norm_values(p, &rhs.values, &NormSpec::lr(r));
            let lap = dec.laplacian(p, &u.values);
            let mut target = rhs.values.clone();
            spec.expect("spectrum").deflate(dec, &mut target);
            let diff: Vec<f64> = lap.iter().zip(&target).map(|(a, b)| a - b).collect();
            let base = dec.norm(p, &rhs.values);
            (if l > 0.0 { w2 / l } else { 0.0 }, if base > 0.0 { dec.norm(p, &diff) / base } else { 0.0 })
        } else {
            dirichlet_diagnostics(dec, patch, &rhs, &u, r)
        };
        Ok::<_, HodgeError>((u, BallDiagnostics { ball: j, constant, residual, closed }))
    })?;

    // fixed ball order keeps the sums bit-reproducible
    let mut v = vec![0.0; dec.count(p)];
    let mut defect_sum = vec![0.0; dec.count(p)];
    for (j, (u, _)) in solved.iter().enumerate() {
        let chi = part.column_dense(j, nv);
        for (a, b) in v.iter_mut().zip(multiply_by_function(dec, p, &chi, &u.values)) {
            *a += b;
        }
        for (a, b) in defect_sum.iter_mut().zip(commutator_defect(dec, &chi, u).values) {
            *a += b;
        }
    }
    let lap = dec.laplacian(p, &v);
    let next: Vec<f64> = lap.iter().zip(&omega.values).map(|(a, b)| a - b).collect();
    let dev: Vec<f64> = defect_sum.iter().zip(&next).map(|(a, b)| a - b).collect();
    let next_norm = dec.norm(p, &next);
    let defect_deviation = if next_norm > 0.0 { dec.norm(p, &dev) / next_norm } else { dec.norm(p, &dev) };

    let v = Cochain { degree: p, values: v };
    let mut w = WeightField::user(weight.to_vec())?;
    check_weight_relative(dec.mesh(), &mut w, cov);
    let us: Vec<&Cochain> = solved.iter().map(|(u, _)| u).collect();
    let inputs = LedgerInputs { ws, omega, v: &v, locals: &us, weight: &w, r };
    let ledger = exponents.iter().flat_map(|&s| inputs.evaluate(s)).collect();

    let balls: Vec<BallDiagnostics> = solved.into_iter().map(|(_, d)| d).collect();
    let mut cs: Vec<f64> = balls.iter().map(|b| b.constant).filter(|c| *c > 0.0).collect();
    cs.sort_by(f64::total_cmp);
    let max_constant = cs.last().copied().unwrap_or(0.0);
    let median_constant = if cs.is_empty() { 0.0 } else { cs[cs.len() / 2] };
    Ok(StepOutcome {
        v,
        next: Cochain { degree: p, values: next },
        diagnostics: StepDiagnostics { step: 0, balls, max_constant, median_constant, defect_deviation, ledger },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderEntry {
    pub step: usize,
    /// t_j = S_j(r).
    pub exponent: f64,
    /// ‖ω_j‖ in L^{t_j}(w_j^{t_j}), w_j = w R^{−2(k−j)} (sup norm when t_j = ∞).
    pub residual_norm: f64,
    /// ‖v_j‖ in L^q(w^q) for q = r and q = min(2, S_2(r)).
    pub v_norms: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct RsmTrace {
    pub r: f64,
    pub s: f64,
    pub steps: usize,
    pub capped: bool,
    pub exponents: [f64; 2],
    pub ladder: Vec<LadderEntry>,
    pub step_diagnostics: Vec<StepDiagnostics>,
    /// ‖ω‖_{L^r(w₀^r)}.
    pub input_norm: f64,
    /// ‖v‖_{L^q(w^q)} / ‖ω‖_{L^r(w₀^r)} for the two q.
    pub c_q: [f64; 2],
    /// ‖v‖_{W^{2,r}(w^r)} / ‖ω‖_{L^r(w₀^r)}.
    pub c_r: f64,
    /// ‖ω̃‖_{L^s(w^s)} / ‖ω‖_{L^r(w₀^r)}.
    pub c_s: f64,
    /// ‖Δv − ω − ω̃‖ / ‖ω‖ in the mass norm.
    pub identity_residual: f64,
    pub ledger_holds: bool,
    /// Largest per-ball constant over the median, per step.
    pub uniformity: f64,
}

impl RsmTrace {
    /// Exponent, residual norm and v norms per step, as CSV.
    pub fn ladder_csv(&self) -> String {
        let mut out = String::from("step,exponent,residual_norm,v_norm_r,v_norm_q\n");
        for e in &self.ladder {
            out.push_str(&format!("{},{:e},{:e},{:e},{:e}\n", e.step, e.exponent, e.residual_norm, e.v_norms[0], e.v_norms[1]));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RsmOutcome {
    pub v: Cochain,
    /// ω̃ with Δv = ω + ω̃.
    pub tilde: Cochain,
    pub trace: RsmTrace,
}

fn ladder_norm(dec: &Dec, p: usize, x: &[f64], t: f64, w: &[f64]) -> f64 {
    if t.is_finite() {
        dec.lr_norm_values(p, x, &NormSpec::lr(t).weighted(w, t))
    } else {
        let ws = dec.simplex_weights(p, &NormSpec::lr(1.0).weighted(w, 1.0)).expect("weighted");
        dec.density(p, x).iter().zip(&ws).map(|(d, w)| d * w).fold(0.0, f64::max)
    }
}

/// k gluing steps; v = Σ (−1)^j v_j and ω̃ = (−1)^{k−1} ω_k, so Δv = ω + ω̃.
pub fn raising_steps(ws: &Workspace, omega: &Cochain, config: &RsmConfig) -> Result<RsmOutcome> {
    config.validate()?;
    let dec = ws.dec();
    dec.check_degree(omega)?;
    let p = omega.degree;
    let n = ws.dim();
    let nv = dec.mesh().num_vertices();
    let (k, capped) = config.resolve_steps(n);
    if capped {
        warn!("raising steps capped at {MAX_STEPS}");
    }
    let base: Vec<f64> = match &config.weight {
        Some(w) if w.len() == nv => w.clone(),
        Some(w) => return Err(HodgeError::LengthMismatch { degree: 0, expected: nv, found: w.len() }),
        None => vec![1.0; nv],
    };
    let radius = &ws.radius().radius;
    let ladder_weight = |j: usize| -> Vec<f64> {
        base.iter().zip(radius).map(|(w, r)| w * r.powi(-2 * (k as i32 - j as i32))).collect()
    };
    let q2 = sobolev_exponent(config.r, 2, n).min(2.0);
    let exponents = [config.r, q2];
    let w0 = ladder_weight(0);
    let input_norm = dec.lr_norm_values(p, &omega.values, &NormSpec::lr(config.r).weighted(&w0, config.r));

    let mut v = vec![0.0; dec.count(p)];
    let mut current = omega.clone();
    let mut ladder = Vec::with_capacity(k);
    let mut diags = Vec::with_capacity(k);
    for j in 0..k {
        let t = sobolev_exponent(config.r, j, n);
        let residual_norm = ladder_norm(dec, p, &current.values, t, &ladder_weight(j));
        let mut step = rsm_step(ws, &current, config.r, &ladder_weight(j + 1), config.localization, &exponents)?;
        step.diagnostics.step = j;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        for (a, b) in v.iter_mut().zip(&step.v.values) {
            *a += sign * b;
        }
        let v_norms = exponents.map(|q| dec.lr_norm_values(p, &step.v.values, &NormSpec::lr(q).weighted(&base, q)));
        ladder.push(LadderEntry { step: j, exponent: t, residual_norm, v_norms });
        diags.push(step.diagnostics);
        current = step.next;
    }
    // k = 0 leaves v = 0 and ω̃ = −ω
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let tilde = current.scaled(sign);
    let v = Cochain { degree: p, values: v };

    let lap = dec.laplacian(p, &v.values);
    let defect: Vec<f64> = (0..lap.len()).map(|i| lap[i] - omega.values[i] - tilde.values[i]).collect();
    let on = dec.norm(p, &omega.values);
    let identity_residual = dec.norm(p, &defect) / on.max(f64::MIN_POSITIVE);
    for (i, x) in [v.values.iter(), tilde.values.iter()].into_iter().flatten().enumerate() {
        if !x.is_finite() {
            return Err(HodgeError::Domain(format!("non-finite value at index {i} of the raising-steps output")));
        }
    }
    let ratio = |x: f64| if input_norm > 0.0 { x / input_norm } else { 0.0 };
    let c_q = exponents.map(|q| ratio(dec.lr_norm_values(p, &v.values, &NormSpec::lr(q).weighted(&base, q))));
    let c_r = ratio(dec.sobolev_norm_values(p, &v.values, &NormSpec::sobolev(config.r, 2).weighted(&base, config.r)));
    let c_s = ratio(ladder_norm(dec, p, &tilde.values, config.s, &base));
    let ledger_holds = diags.iter().all(|d| d.ledger.iter().all(|c| c.holds));
    let uniformity = diags
        .iter()
        .map(|d| if d.median_constant > 0.0 { d.max_constant / d.median_constant } else { 1.0 })
        .fold(1.0, f64::max);
    Ok(RsmOutcome {
        v,
        tilde,
        trace: RsmTrace {
            r: config.r,
            s: config.s,
            steps: k,
            capped,
            exponents,
            ladder,
            step_diagnostics: diags,
            input_norm,
            c_q,
            c_r,
            c_s,
            identity_residual,
            ledger_holds,
            uniformity,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_manifold, ManifoldKind};
    use crate::workspace::WorkspaceOptions;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ws(kind: ManifoldKind, n: usize, a: f64) -> Workspace {
        Workspace::new(generate_test_manifold(kind, n, a).unwrap(), WorkspaceOptions::default()).unwrap()
    }

    #[test]
    fn identity_and_ledger_on_flat_torus() {
        let w = ws(ManifoldKind::FlatTorus, 16, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in 0..=1 {
            let omega = Cochain::random(w.mesh(), p, &mut rng);
            let out = raising_steps(&w, &omega, &RsmConfig::new(1.5)).unwrap();
            assert_eq!(out.trace.steps, 1);
            assert!(out.trace.identity_residual < 1e-10, "{}", out.trace.identity_residual);
            assert!(out.trace.ledger_holds);
        }
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let w = ws(ManifoldKind::FlatTorus, 8, 0.0);
        let out = raising_steps(&w, &Cochain::zeros(w.mesh(), 1), &RsmConfig::new(1.5).with_steps(2)).unwrap();
        assert_eq!(out.v.max_abs(), 0.0);
        assert_eq!(out.tilde.max_abs(), 0.0);
    }

    #[test]
    fn two_steps_keep_the_identity_on_bumpy_torus() {
        let w = ws(ManifoldKind::BumpyTorus, 16, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let omega = Cochain::random(w.mesh(), 1, &mut rng);
        let out = raising_steps(&w, &omega, &RsmConfig::new(1.5).with_steps(2)).unwrap();
        assert!(out.trace.identity_residual < 1e-10);
        assert!(out.trace.ledger_holds);
    }

    #[test]
    fn chi_identically_one_has_no_commutator() {
        let w = ws(ManifoldKind::FlatTorus, 8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Cochain::random(w.mesh(), 1, &mut rng);
        let b = commutator_defect(w.dec(), &vec![1.0; w.mesh().num_vertices()], &u);
        assert!(b.max_abs() < 1e-12 * u.max_abs() * w.dec().stiffness(1).max_abs());
    }

    #[test]
    fn commutator_bound_on_partition_columns() {
        let w = ws(ManifoldKind::FlatTorus, 16, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let part = w.partition();
        let nv = w.mesh().num_vertices();
        for p in 0..=1 {
            let u = Cochain::random(w.mesh(), p, &mut rng);
            let chk = commutator_bound_check(w.dec(), &part.column_dense(3, nv), part.c_chi, &u);
            assert_eq!(chk.violations, 0, "p={p} worst {}", chk.worst_ratio);
        }
    }

    #[test]
    fn outputs_are_linear_in_the_input() {
        let w = ws(ManifoldKind::FlatTorus, 16, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Cochain::random(w.mesh(), 1, &mut rng);
        let b = Cochain::random(w.mesh(), 1, &mut rng);
        let cfg = RsmConfig::new(1.5);
        let ra = raising_steps(&w, &a, &cfg).unwrap();
        let rb = raising_steps(&w, &b, &cfg).unwrap();
        let rab = raising_steps(&w, &a.plus(&b), &cfg).unwrap();
        let dv = rab.v.minus(&ra.v.plus(&rb.v)).max_abs() / rab.v.max_abs();
        let dt = rab.tilde.minus(&ra.tilde.plus(&rb.tilde)).max_abs() / rab.tilde.max_abs();
        assert!(dv < 1e-9 && dt < 1e-9);
    }

    #[test]
    fn whole_manifold_ball_leaves_only_the_harmonic_part() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        let rf = crate::covering::RadiusField::from_values(0.1, vec![1.0; m.num_vertices()], 1.0 / 3.0);
        let cov = crate::covering::vitali_cover(&m, &rf).unwrap();
        let w = Workspace::from_parts(m, rf, cov, WorkspaceOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let omega = Cochain::random(w.mesh(), 1, &mut rng);
        let out = raising_steps(&w, &omega, &RsmConfig::new(1.5)).unwrap();
        let spec = w.spectrum(1).unwrap();
        let h = spec.project_values(w.dec(), &omega.values);
        // ω̃ = −Hω
        let diff: Vec<f64> = out.tilde.values.iter().zip(&h).map(|(a, b)| a + b).collect();
        assert!(w.dec().norm(1, &diff) < 1e-9 * w.dec().norm(1, &omega.values));
    }

    #[test]
    fn local_input_has_local_outputs() {
        let w = ws(ManifoldKind::FlatTorus, 32, 0.0);
        let mut omega = Cochain::zeros(w.mesh(), 0);
        omega.values[0] = 1.0;
        let out = raising_steps(&w, &omega, &RsmConfig::new(1.5)).unwrap();
        let chk = compact_support_check(w.mesh(), w.covering(), &omega, &out.v, &out.tilde, out.trace.steps);
        assert!(chk.holds);
        let zero = Cochain::zeros(w.mesh(), 0);
        assert!(compact_support_check(w.mesh(), w.covering(), &zero, &zero, &zero, 1).holds);
    }

    #[test]
    fn threshold_step_counts() {
        assert_eq!(RsmConfig::new(2.0).resolve_steps(3), (0, false));
        assert_eq!(RsmConfig::new(1.5).resolve_steps(3), (1, false));
        assert_eq!(RsmConfig::new(1.2).resolve_steps(3), (1, false));
        assert!(RsmConfig::new(0.9).validate().is_err());
    }
}
