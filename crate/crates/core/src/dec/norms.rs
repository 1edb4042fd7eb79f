//! Weighted L^r and Sobolev norms of cochains.
//!
//! The pointwise density of a p-cochain on σ is |ω_σ|/μ_p(σ); a norm sums
//! μ_n(σ)·W(σ)·density^r, where W(σ) is the vertex-averaged weight raised to
//! the weight power. Derivative terms use the chart-free surrogates
//! ‖∇u‖ = (‖du‖^r + ‖d*u‖^r)^{1/r} and
//! |∇²u| = ((|Δu|² + |dd*u|² + |d*du|²)/2)^{1/2}; the factor 1/2 makes an
//! eigenform of Δ_0 with eigenvalue λ have |∇²u| = λ|u|.

use serde::Serialize;

use super::{Cochain, Dec};
use crate::error::{HodgeError, Result};

#[derive(Clone, Copy, Debug)]
pub struct NormSpec<'a> {
    pub r: f64,
    pub order: usize,
    /// Per-vertex weight.
    pub weight: Option<&'a [f64]>,
    pub weight_power: f64,
    /// Restricts the sum to simplices whose vertices are all marked.
    pub region: Option<&'a [bool]>,
}

impl<'a> NormSpec<'a> {
    pub fn lr(r: f64) -> Self {
        NormSpec { r, order: 0, weight: None, weight_power: 1.0, region: None }
    }
    pub fn sobolev(r: f64, order: usize) -> Self {
        NormSpec { order, ..Self::lr(r) }
    }
    /// Weight w^power (so `weighted(w, r)` is the L^r(M, w^r) norm).
    pub fn weighted(self, w: &'a [f64], power: f64) -> Self {
        NormSpec { weight: Some(w), weight_power: power, ..self }
    }
    pub fn within(self, region: &'a [bool]) -> Self {
        NormSpec { region: Some(region), ..self }
    }
    pub fn with_exponent(self, r: f64) -> Self {
        NormSpec { r, ..self }
    }
    fn validate(&self) -> Result<()> {
        if !(self.r >= 1.0) || !self.r.is_finite() {
            return Err(HodgeError::Domain(format!("norm exponent must be finite and ≥ 1, got {}", self.r)));
        }
        if self.order > 2 {
            return Err(HodgeError::Domain(format!("Sobolev order {} > 2", self.order)));
        }
        Ok(())
    }
}

/// The three summands of a W^{2,r} norm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SobolevTerms {
    pub zeroth: f64,
    pub first: f64,
    pub second: f64,
}

impl SobolevTerms {
    pub fn total(&self, order: usize) -> f64 {
        match order {
            0 => self.zeroth,
            1 => self.zeroth + self.first,
            _ => self.zeroth + self.first + self.second,
        }
    }
}

/// S_k(r) with 1/S_k(r) = 1/r − k/n; +∞ once the right side is ≤ 0.
pub fn sobolev_exponent(r: f64, k: usize, n: usize) -> f64 {
    if k == 0 {
        return r;
    }
    let denom = n as f64 - k as f64 * r;
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        r * n as f64 / denom
    }
}

/// Smallest k ≥ 0 with S_k(r) ≥ s (up to 1e-12 relative rounding).
pub fn threshold_steps(r: f64, s: f64, n: usize) -> usize {
    let mut k = 0;
    loop {
        let t = sobolev_exponent(r, k, n);
        if t >= s * (1.0 - 1e-12) {
            return k;
        }
        k += 1;
    }
}

fn lp_sum(r: f64, terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    // Σ c·x^r computed with scaling by max x for large r
    let items: Vec<(f64, f64)> = terms.filter(|&(c, x)| c > 0.0 && x > 0.0).collect();
    let top = items.iter().fold(0.0, |a: f64, &(_, x)| a.max(x));
    if top == 0.0 {
        return 0.0;
    }
    let s: f64 = items.iter().map(|&(c, x)| c * (x / top).powf(r)).sum();
    top * s.powf(1.0 / r)
}

impl Dec {
    /// Weight per p-simplex (vertex mean raised to the power), if any.
    pub fn simplex_weights(&self, p: usize, spec: &NormSpec<'_>) -> Option<Vec<f64>> {
        let w = spec.weight?;
        let m = self.mesh();
        Some(
            (0..m.count(p))
                .map(|i| {
                    let s = m.simplex(p, i);
                    let mean = s.iter().map(|&v| w[v]).sum::<f64>() / s.len() as f64;
                    mean.powf(spec.weight_power)
                })
                .collect(),
        )
    }

    /// Whether each p-simplex lies in the norm's region.
    pub fn region_mask(&self, p: usize, region: Option<&[bool]>) -> Option<Vec<bool>> {
        let mask = region?;
        let m = self.mesh();
        Some((0..m.count(p)).map(|i| m.simplex(p, i).iter().all(|&v| mask[v])).collect())
    }

    /// |x_σ| / μ_p(σ).
    pub fn density(&self, p: usize, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.mesh().volumes(p)).map(|(a, v)| a.abs() / v).collect()
    }

    /// L^r norm of given pointwise densities on p-simplices.
    pub fn norm_of_density(&self, p: usize, density: &[f64], spec: &NormSpec<'_>) -> f64 {
        let weights = self.simplex_weights(p, spec);
        let region = self.region_mask(p, spec.region);
        let support = self.mesh().support_volumes(p);
        lp_sum(
            spec.r,
            (0..density.len()).filter(|&i| region.as_ref().is_none_or(|r| r[i])).map(|i| {
                let w = weights.as_ref().map_or(1.0, |w| w[i]);
                (support[i] * w, density[i])
            }),
        )
    }

    pub fn lr_norm_values(&self, p: usize, x: &[f64], spec: &NormSpec<'_>) -> f64 {
        self.norm_of_density(p, &self.density(p, x), spec)
    }

    pub fn lr_norm(&self, omega: &Cochain, spec: &NormSpec<'_>) -> Result<f64> {
        spec.validate()?;
        self.check_degree(omega)?;
        Ok(self.lr_norm_values(omega.degree, &omega.values, spec))
    }

    /// Pointwise second-order surrogate density on p-simplices.
    pub fn hessian_density(&self, p: usize, x: &[f64]) -> Vec<f64> {
        let lap = self.density(p, &self.laplacian(p, x));
        let dd = self.density(p, &self.d_dstar(p, x));
        let sd = self.density(p, &self.dstar_d(p, x));
        (0..x.len()).map(|i| ((lap[i].powi(2) + dd[i].powi(2) + sd[i].powi(2)) / 2.0).sqrt()).collect()
    }

    /// Pointwise first-order surrogate on p-simplices: the root-sum-square of
    /// the largest du density over cofaces and the largest d*u density over
    /// faces.
    pub fn gradient_density(&self, p: usize, x: &[f64]) -> Vec<f64> {
        let m = self.mesh();
        let n = self.dim();
        let du = if p < n { self.density(p + 1, &self.d(p, x)) } else { Vec::new() };
        let dsu = if p > 0 { self.density(p - 1, &self.dstar(p, x)) } else { Vec::new() };
        (0..x.len())
            .map(|i| {
                let a = if p < n { m.cofaces(p, i).iter().map(|&(c, _)| du[c]).fold(0.0, f64::max) } else { 0.0 };
                let b = if p > 0 { m.faces(p, i).iter().map(|&(f, _)| dsu[f]).fold(0.0, f64::max) } else { 0.0 };
                (a * a + b * b).sqrt()
            })
            .collect()
    }

    pub fn sobolev_terms_values(&self, p: usize, x: &[f64], spec: &NormSpec<'_>) -> SobolevTerms {
        let zeroth = self.lr_norm_values(p, x, spec);
        let mut out = SobolevTerms { zeroth, ..Default::default() };
        if spec.order >= 1 {
            let r = spec.r;
            let a = if p < self.dim() { self.lr_norm_values(p + 1, &self.d(p, x), spec) } else { 0.0 };
            let b = if p > 0 { self.lr_norm_values(p - 1, &self.dstar(p, x), spec) } else { 0.0 };
            out.first = lp_sum(r, [(1.0, a), (1.0, b)].into_iter());
        }
        if spec.order >= 2 {
            out.second = self.norm_of_density(p, &self.hessian_density(p, x), spec);
        }
        out
    }

    pub fn sobolev_terms(&self, omega: &Cochain, spec: &NormSpec<'_>) -> Result<SobolevTerms> {
        spec.validate()?;
        self.check_degree(omega)?;
        Ok(self.sobolev_terms_values(omega.degree, &omega.values, spec))
    }

    /// Σ_{j ≤ order} ‖∇^j u‖_{L^r}.
    pub fn sobolev_norm(&self, omega: &Cochain, spec: &NormSpec<'_>) -> Result<f64> {
        Ok(self.sobolev_terms(omega, spec)?.total(spec.order))
    }

    pub fn sobolev_norm_values(&self, p: usize, x: &[f64], spec: &NormSpec<'_>) -> f64 {
        self.sobolev_terms_values(p, x, spec).total(spec.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_manifold, ManifoldKind};

    #[test]
    fn exponent_examples() {
        assert_eq!(sobolev_exponent(2.0, 1, 4), 4.0);
        assert_eq!(sobolev_exponent(2.0, 2, 4), f64::INFINITY);
        assert_eq!(sobolev_exponent(1.5, 1, 3), 3.0);
        assert_eq!(sobolev_exponent(1.7, 0, 2), 1.7);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_steps(2.0, 2.0, 3), 0);
        assert_eq!(threshold_steps(1.5, 2.0, 3), 1);
        assert_eq!(threshold_steps(1.2, 2.0, 3), 1);
        assert_eq!(threshold_steps(1.5, 2.0, 2), 1);
    }

    #[test]
    fn l2_norm_is_the_mass_norm() {
        let m = generate_test_manifold(ManifoldKind::Sphere, 8, 0.0).unwrap();
        let dec = Dec::from_mesh(&m);
        let x: Vec<f64> = (0..m.count(1)).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = dec.lr_norm_values(1, &x, &NormSpec::lr(2.0));
        let b = dec.norm(1, &x);
        assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn single_simplex_norm_has_closed_form() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        let dec = Dec::from_mesh(&m);
        let mut x = vec![0.0; m.count(1)];
        x[7] = 2.5;
        let r = 3.0;
        let expected = m.support_volume(1, 7).powf(1.0 / r) * 2.5 / m.volume(1, 7);
        let got = dec.lr_norm_values(1, &x, &NormSpec::lr(r));
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn large_exponents_do_not_overflow() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        let dec = Dec::from_mesh(&m);
        let x = vec![1e200; m.count(0)];
        let v = dec.lr_norm_values(0, &x, &NormSpec::lr(16.0));
        assert!(v.is_finite() && v > 0.0);
    }
}
