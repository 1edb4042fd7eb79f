use serde::{Deserialize, Serialize};

use super::radius::RadiusField;
use super::vitali::AdmissibleCovering;
use crate::error::{HodgeError, Result};
use crate::mesh::SimplicialManifold;

const EXPONENT_CAP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum WeightKind {
    Constant,
    RadiusPower(u32),
    User,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightField {
    pub kind: WeightKind,
    /// Per-vertex value.
    pub values: Vec<f64>,
    /// Dual-volume mean over each covering ball (after [`check_weight_relative`]).
    pub ball_means: Vec<f64>,
    pub c_iw: f64,
    pub c_sw: f64,
}

impl WeightField {
    pub fn constant(nv: usize) -> Self {
        Self::with_kind(WeightKind::Constant, vec![1.0; nv])
    }

    pub fn user(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().position(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(HodgeError::Domain(format!("weight must be positive and finite (vertex {v})")));
        }
        Ok(Self::with_kind(WeightKind::User, values))
    }

    fn with_kind(kind: WeightKind, values: Vec<f64>) -> Self {
        WeightField { kind, values, ball_means: Vec::new(), c_iw: 1.0, c_sw: 1.0 }
    }

    /// Pointwise product (kind becomes `User` unless one factor is constant).
    pub fn times(&self, other: &WeightField) -> WeightField {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        let kind = match (self.kind, other.kind) {
            (WeightKind::Constant, k) | (k, WeightKind::Constant) => k,
            _ => WeightKind::User,
        };
        Self::with_kind(kind, values)
    }

    pub fn powf(&self, e: f64) -> WeightField {
        Self::with_kind(WeightKind::User, self.values.iter().map(|w| w.powf(e)).collect())
    }

    pub fn max_over_min(&self) -> f64 {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// w(x) = R(x)^{−2k}.
pub fn weight_from_radius(rf: &RadiusField, k: u32) -> WeightField {
    let kind = if k == 0 { WeightKind::Constant } else { WeightKind::RadiusPower(k) };
    WeightField::with_kind(kind, rf.radius.iter().map(|r| r.powi(-2 * k as i32)).collect())
}

/// The same from an arbitrary positive radius profile (e.g. the smoothed one).
pub fn weight_from_radius_values(radius: &[f64], k: u32) -> WeightField {
    let kind = if k == 0 { WeightKind::Constant } else { WeightKind::RadiusPower(k) };
    WeightField::with_kind(kind, radius.iter().map(|r| r.powi(-2 * k as i32)).collect())
}

/// α(x) = (1 + ρ(x))^{−q} with ρ the distance to `base`.
pub fn decaying_weight(m: &SimplicialManifold, base: usize, q: f64) -> WeightField {
    let rho = m.geodesic_distance(base);
    WeightField::with_kind(WeightKind::User, rho.iter().map(|d| (1.0 + d).powf(-q)).collect())
}

/// Ball means w_j (dual-volume weighted) and the tightest c_iw ≤ 1 ≤ c_sw
/// with c_iw·w_j ≤ w ≤ c_sw·w_j on every B_j; stored into `w`.
pub fn check_weight_relative(m: &SimplicialManifold, w: &mut WeightField, cov: &AdmissibleCovering) -> (f64, f64) {
    let mut c_iw = f64::INFINITY;
    let mut c_sw: f64 = 0.0;
    w.ball_means = cov
        .balls
        .iter()
        .map(|b| {
            let vol: f64 = b.members.iter().map(|&v| m.dual_volume(v)).sum();
            let mean = b.members.iter().map(|&v| w.values[v] * m.dual_volume(v)).sum::<f64>() / vol;
            for &v in &b.members {
                c_iw = c_iw.min(w.values[v] / mean);
                c_sw = c_sw.max(w.values[v] / mean);
            }
            mean
        })
        .collect();
    w.c_iw = c_iw;
    w.c_sw = c_sw;
    (c_iw, c_sw)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Integrability {
    /// γ(w, t) = Σ_x w(x)^{2t/(2−t)} · dual volume(x).
    pub value: f64,
    pub exponent: f64,
    /// The exponent hit the cap of 1e6.
    pub saturated: bool,
}

pub fn weight_integrability(m: &SimplicialManifold, w: &WeightField, t: f64) -> Result<Integrability> {
    if !(t > 1.0 && t < 2.0) {
        return Err(HodgeError::Domain(format!("integrability exponent t must lie in (1, 2), got {t}")));
    }
    let raw = 2.0 * t / (2.0 - t);
    let saturated = raw > EXPONENT_CAP;
    let exponent = raw.min(EXPONENT_CAP);
    let value = w.values.iter().enumerate().map(|(v, x)| x.powf(exponent) * m.dual_volume(v)).sum();
    Ok(Integrability { value, exponent, saturated })
}
