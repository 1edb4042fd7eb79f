use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{HodgeError, Result};
use crate::mesh::{ChartDevelopment, SimplicialManifold};
use crate::par;

/// Smallest divisor the automatic reduction may reach.
pub const MIN_DIVISOR: f64 = 8.0;
pub const DEFAULT_DIVISOR: f64 = 120.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusField {
    pub epsilon: f64,
    /// R_ε(x) per vertex, in (0, 1].
    pub radius: Vec<f64>,
    /// Per-vertex value before sub-ball inheritance.
    pub measured: Vec<f64>,
    pub floor: f64,
    /// Divisor actually used for the core radii.
    pub divisor: f64,
    pub configured_divisor: f64,
    /// r(x) = R(x) / divisor.
    pub core: Vec<f64>,
}

impl RadiusField {
    /// A field from given radii (for planted examples and tests).
    pub fn from_values(epsilon: f64, radius: Vec<f64>, divisor: f64) -> Self {
        let core = radius.iter().map(|r| r / divisor).collect();
        let floor = radius.iter().copied().fold(f64::INFINITY, f64::min);
        RadiusField { epsilon, measured: radius.clone(), radius, floor, divisor, configured_divisor: divisor, core }
    }

    pub fn min(&self) -> f64 {
        self.radius.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.radius.iter().copied().fold(0.0, f64::max)
    }
    /// max R / min R.
    pub fn spread(&self) -> f64 {
        self.max() / self.min()
    }
}

/// Discrete floor for the admissible radius: twice the mean edge length,
/// raised if needed so that the smallest covering ball (5/8 of the floor)
/// still contains the whole 1-ring of its center.
pub fn radius_floor(m: &SimplicialManifold) -> f64 {
    (2.0 * m.mean_edge_length()).max(1.7 * m.max_edge_length())
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(HodgeError::Domain(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

fn development_cap(m: &SimplicialManifold) -> f64 {
    1.0 + 2.0 * m.max_edge_length()
}

/// ε-admissible radius at one vertex: the largest R ≤ 1 whose chart has
/// both distortions ≤ ε, clamped below by [`radius_floor`].
pub fn admissible_radius(m: &SimplicialManifold, x: usize, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    if x >= m.num_vertices() {
        return Err(HodgeError::InvalidVertex { vertex: x, count: m.num_vertices() });
    }
    let dev = ChartDevelopment::new(m, x, development_cap(m));
    Ok(dev.admissible_extent(eps).min(1.0).max(radius_floor(m)))
}

/// Admissible radius at every vertex, then the sub-ball pass
/// R(y) ← max(R(y), max_x R(x) − d(x, y)): a ball inside an admissible ball
/// is admissible, and this makes the field 1-Lipschitz from below.
pub fn radius_field(m: &SimplicialManifold, eps: f64, divisor: f64) -> Result<RadiusField> {
    check_epsilon(eps)?;
    if !(divisor >= MIN_DIVISOR) {
        return Err(HodgeError::Domain(format!("Vitali divisor must be ≥ {MIN_DIVISOR}, got {divisor}")));
    }
    let floor = radius_floor(m);
    let cap = development_cap(m);
    let measured: Vec<f64> = par::map_range(m.num_vertices(), |x| {
        ChartDevelopment::new(m, x, cap).admissible_extent(eps).min(1.0).max(floor)
    });
    let sources: Vec<(usize, f64)> = measured.iter().enumerate().map(|(x, &r)| (x, -r)).collect();
    let radius: Vec<f64> = m
        .multi_source_distance(&sources, f64::INFINITY)
        .iter()
        .zip(&measured)
        .map(|(d, &r)| r.max(-d).min(1.0))
        .collect();

    let min_r = radius.iter().copied().fold(f64::INFINITY, f64::min);
    let resolved = (min_r / (2.0 * m.mean_edge_length())).clamp(MIN_DIVISOR, divisor);
    if resolved < divisor {
        warn!(
            "core radius R/{divisor} falls below two edge lengths; using divisor {resolved:.2} instead"
        );
    }
    let core = radius.iter().map(|r| r / resolved).collect();
    Ok(RadiusField { epsilon: eps, radius, measured, floor, divisor: resolved, configured_divisor: divisor, core })
}

/// Pairs (x, y) with d(x,y) ≤ (R(x)+R(y))/4 but R(x) > 4R(y)(1 + 1e-9).
pub fn check_radius_lipschitz(m: &SimplicialManifold, rf: &RadiusField) -> Vec<(usize, usize)> {
    let rmax = rf.max();
    par::map_range(m.num_vertices(), |x| {
        let rx = rf.radius[x];
        let d = m.geodesic_distance_within(x, (rx + rmax) / 4.0);
        (0..m.num_vertices())
            .filter(|&y| y != x && d[y] <= (rx + rf.radius[y]) / 4.0 && rx > 4.0 * rf.radius[y] * (1.0 + 1e-9))
            .map(|y| (x, y))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_manifold, ManifoldKind};

    #[test]
    fn flat_torus_radius_is_homogeneous() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        let rf = radius_field(&m, 0.1, DEFAULT_DIVISOR).unwrap();
        assert!(rf.max() - rf.min() < 1e-6);
        assert!(rf.radius.iter().all(|&r| r > 0.0 && r <= 1.0));
    }

    #[test]
    fn tiny_epsilon_hits_the_floor() {
        let m = generate_test_manifold(ManifoldKind::BumpyTorus, 8, 0.3).unwrap();
        let rf = radius_field(&m, 1e-6, DEFAULT_DIVISOR).unwrap();
        assert!(rf.radius.iter().all(|&r| (r - rf.floor).abs() < 1e-15));
    }

    #[test]
    fn planted_violation_is_reported() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 16, 0.0).unwrap();
        let mut radius = vec![0.1; m.num_vertices()];
        radius[0] = 1.0;
        let rf = RadiusField::from_values(0.1, radius, DEFAULT_DIVISOR);
        let bad = check_radius_lipschitz(&m, &rf);
        let nb = m.neighbors(0)[0].0;
        assert!(bad.contains(&(0, nb)));
        assert!(bad.iter().all(|&(x, _)| x == 0));
    }

    #[test]
    fn constant_field_has_no_violations() {
        let m = generate_test_manifold(ManifoldKind::Sphere, 8, 0.0).unwrap();
        let rf = RadiusField::from_values(0.1, vec![0.3; m.num_vertices()], DEFAULT_DIVISOR);
        assert!(check_radius_lipschitz(&m, &rf).is_empty());
    }

    #[test]
    fn epsilon_out_of_range_is_rejected() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        assert!(admissible_radius(&m, 0, 1.0).is_err());
        assert!(radius_field(&m, 0.1, 4.0).is_err());
    }
}
