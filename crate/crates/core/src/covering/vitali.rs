use serde::{Deserialize, Serialize};

use super::partition::Partition;
use super::radius::RadiusField;
use crate::error::{HodgeError, Result};
use crate::mesh::SimplicialManifold;
use crate::par;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    /// r(x_j).
    pub core_radius: f64,
    /// R_j = 5 r(x_j).
    pub radius: f64,
    /// Vertices with d(x_j, ·) < R_j, sorted.
    pub members: Vec<usize>,
    /// d(x_j, ·) for each member.
    pub distances: Vec<f64>,
    /// Vertices with d(x_j, ·) < 2R_j, sorted.
    pub doubled_members: Vec<usize>,
}

impl Ball {
    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn mask(&self, nv: usize) -> Vec<bool> {
        let mut mask = vec![false; nv];
        for &v in &self.members {
            mask[v] = true;
        }
        mask
    }

    /// Member mask of the concentric ball of radius `factor`·R_j.
    pub fn scaled_mask(&self, nv: usize, factor: f64) -> Vec<bool> {
        let mut mask = vec![false; nv];
        for (&v, &d) in self.members.iter().zip(&self.distances) {
            if d < factor * self.radius {
                mask[v] = true;
            }
        }
        mask
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmissibleCovering {
    pub epsilon: f64,
    pub dim: usize,
    pub divisor: f64,
    pub balls: Vec<Ball>,
    /// Covering balls containing each vertex.
    pub membership: Vec<usize>,
    /// T_meas: the largest membership count.
    pub overlap: usize,
    pub overlap_bound: f64,
    pub partition: Option<Partition>,
}

impl AdmissibleCovering {
    pub fn len(&self) -> usize {
        self.balls.len()
    }
    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }
    pub fn partition(&self) -> Result<&Partition> {
        self.partition.as_ref().ok_or_else(|| HodgeError::Domain("covering has no partition of unity".into()))
    }

    /// Pairs of accepted centers violating core-ball disjointness.
    pub fn disjointness_violations(&self, m: &SimplicialManifold) -> Vec<(usize, usize)> {
        let rmax = self.balls.iter().map(|b| b.core_radius).fold(0.0, f64::max);
        let mut out = Vec::new();
        for (i, bi) in self.balls.iter().enumerate() {
            let d = m.geodesic_distance_within(bi.center, bi.core_radius + rmax);
            for (j, bj) in self.balls.iter().enumerate().skip(i + 1) {
                if d[bj.center] <= bi.core_radius + bj.core_radius {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Compact JSON view: balls (center, r, R, members), T_meas, the bound
    /// and the partition matrix as (vertex, ball, value) triplets.
    pub fn to_json(&self) -> serde_json::Value {
        let balls: Vec<serde_json::Value> = self
            .balls
            .iter()
            .map(|b| {
                serde_json::json!({
                    "center": b.center,
                    "r": b.core_radius,
                    "R": b.radius,
                    "members": b.members,
                })
            })
            .collect();
        let mut value = serde_json::json!({
            "epsilon": self.epsilon,
            "dimension": self.dim,
            "divisor": self.divisor,
            "ball_count": self.balls.len(),
            "balls": balls,
            "t_meas": self.overlap,
            "overlap_bound": self.overlap_bound,
        });
        if let Some(p) = &self.partition {
            value["partition"] = serde_json::json!({
                "triplets": p.triplets(),
                "c_chi": p.c_chi,
                "c_chi2": p.c_chi2,
                "gradient": p.gradient,
            });
        }
        value
    }
}

/// ((1+ε)/(1−ε))^{n/2} · 120ⁿ.
pub fn overlap_bound(eps: f64, n: usize) -> f64 {
    overlap_bound_for_divisor(eps, n, 120.0)
}

/// The same bound with the Vitali divisor in place of 120.
pub fn overlap_bound_for_divisor(eps: f64, n: usize, divisor: f64) -> f64 {
    ((1.0 + eps) / (1.0 - eps)).powf(n as f64 / 2.0) * divisor.powi(n as i32)
}

/// Greedy disjoint selection of core balls in decreasing order of r (ties by
/// vertex index); the covering balls are the 5× dilations.
pub fn vitali_cover(m: &SimplicialManifold, rf: &RadiusField) -> Result<AdmissibleCovering> {
    let nv = m.num_vertices();
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by(|&a, &b| rf.core[b].total_cmp(&rf.core[a]).then(a.cmp(&b)));
    let rmax = rf.core.iter().copied().fold(0.0, f64::max);
    let mut blocked = vec![false; nv];
    let mut centers = Vec::new();
    for &x in &order {
        if blocked[x] {
            continue;
        }
        centers.push(x);
        let rx = rf.core[x];
        let d = m.geodesic_distance_within(x, rx + rmax);
        for y in 0..nv {
            if d[y] <= rx + rf.core[y] {
                blocked[y] = true;
            }
        }
    }

    let balls: Vec<Ball> = par::map_range(centers.len(), |j| {
        let c = centers[j];
        let radius = 5.0 * rf.core[c];
        let d = m.geodesic_distance_within(c, 2.0 * radius);
        let members: Vec<usize> = (0..nv).filter(|&v| d[v] < radius).collect();
        let distances = members.iter().map(|&v| d[v]).collect();
        let doubled_members = (0..nv).filter(|&v| d[v] < 2.0 * radius).collect();
        Ball { center: c, core_radius: rf.core[c], radius, members, distances, doubled_members }
    });

    let mut membership = vec![0usize; nv];
    for b in &balls {
        for &v in &b.members {
            membership[v] += 1;
        }
    }
    if let Some(v) = membership.iter().position(|&c| c == 0) {
        return Err(HodgeError::CoverageGap { vertex: v });
    }
    let overlap = membership.iter().copied().max().unwrap_or(0);
    Ok(AdmissibleCovering {
        epsilon: rf.epsilon,
        dim: m.dim(),
        divisor: rf.divisor,
        balls,
        membership,
        overlap,
        overlap_bound: overlap_bound(rf.epsilon, m.dim()),
        partition: None,
    })
}
