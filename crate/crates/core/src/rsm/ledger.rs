//! Gluing and weight-summation inequalities evaluated on both sides.

use serde::Serialize;

use crate::covering::WeightField;
use crate::dec::{Cochain, NormSpec};
use crate::workspace::Workspace;

#[derive(Clone, Debug, Serialize)]
pub struct LedgerCheck {
    pub name: String,
    pub exponent: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// (rhs − lhs) / rhs.
    pub margin: f64,
    pub holds: bool,
}

impl LedgerCheck {
    fn new(name: &str, exponent: f64, lhs: f64, rhs: f64) -> Self {
        let margin = if rhs > 0.0 { (rhs - lhs) / rhs } else if lhs > 0.0 { f64::NEG_INFINITY } else { 0.0 };
        // equality up to roundoff counts as holding
        let holds = lhs <= rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        LedgerCheck { name: name.to_string(), exponent, lhs, rhs, margin, holds }
    }
}

/// One gluing step: the right-hand side, the glued v = Σ χ_j u_j, the local
/// solutions and the weight (relative constants already measured).
pub struct LedgerInputs<'a> {
    pub ws: &'a Workspace,
    pub omega: &'a Cochain,
    pub v: &'a Cochain,
    pub locals: &'a [&'a Cochain],
    pub weight: &'a WeightField,
    pub r: f64,
}

impl LedgerInputs<'_> {
    /// Gluing bounds for v, ∇v, ∇²v and the weight-summation bound (γ = 2) at exponent s.
    pub fn evaluate(&self, s: f64) -> Vec<LedgerCheck> {
        let ws = self.ws;
        let dec = ws.dec();
        let cov = ws.covering();
        let part = ws.partition();
        let p = self.v.degree;
        let nv = dec.mesh().num_vertices();
        let eps = cov.epsilon;
        let t = cov.overlap as f64;
        let w = &self.weight.values;
        let c_sw = self.weight.c_sw;
        let c_iw = self.weight.c_iw;
        let radius = &ws.radius().radius;

        let glued = dec.sobolev_terms_values(p, &self.v.values, &NormSpec::sobolev(s, 2).weighted(w, s));
        let mut sum0 = 0.0;
        let mut sum1 = 0.0;
        let mut sum2 = 0.0;
        let mut summed = 0.0;
        let mut c_local: f64 = 0.0;
        let mut k_ratio: f64 = 0.0;
        for (j, u) in self.locals.iter().enumerate() {
            let ball = &cov.balls[j];
            let mask = ball.mask(nv);
            let terms = dec.sobolev_terms_values(p, &u.values, &NormSpec::sobolev(s, 2).within(&mask));
            let (a, g, h) = (terms.zeroth, terms.first, terms.second);
            let wj = self.weight.ball_means[j].powf(s);
            let grad_chi = part.gradient[j];
            let lap_chi = part.laplacian[j];
            sum0 += wj * a.powf(s);
            sum1 += wj * ((grad_chi * a).powf(s) + g.powf(s));
            sum2 += wj * ((lap_chi * a).powf(s) + h.powf(s) + (grad_chi * g).powf(s));
            summed += wj * a.powf(s);
            let o = dec.lr_norm_values(p, &self.omega.values, &NormSpec::lr(self.r).within(&mask));
            if o > 0.0 {
                c_local = c_local.max(ball.radius.powi(2) * a / o);
            }
            for &x in &ball.members {
                k_ratio = k_ratio.max(radius[x] / ball.radius);
            }
        }
        let base = t.powf(s) * c_sw.powf(s);
        let leibniz = 1.0 + eps;
        let mut out = vec![
            LedgerCheck::new("gluing_value", s, glued.zeroth.powf(s), base * sum0),
            LedgerCheck::new("gluing_gradient", s, glued.first.powf(s), 2f64.powf(s - 1.0) * leibniz * base * sum1),
            LedgerCheck::new("gluing_hessian", s, glued.second.powf(s), 3f64.powf(s - 1.0) * leibniz * base * sum2),
        ];
        let tilde: Vec<f64> = w.iter().zip(radius).map(|(w, r)| w * r.powi(-2)).collect();
        let omega_tilde = dec.lr_norm_values(p, &self.omega.values, &NormSpec::lr(self.r).weighted(&tilde, self.r));
        let c_w = k_ratio.powi(2) * c_local / c_iw;
        out.push(LedgerCheck::new(
            "weight_summation",
            s,
            summed.powf(1.0 / s),
            c_w * t.powf(s / self.r) * omega_tilde,
        ));
        out
    }
}
