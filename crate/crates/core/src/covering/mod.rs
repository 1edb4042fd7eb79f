//! Admissible radius field, Vitali covering, partition of unity and weights
//! relative to the covering.

mod partition;
mod radius;
mod vitali;
mod weights;

pub use partition::{bump, partition_of_unity, Partition};
pub use radius::{
    admissible_radius, check_radius_lipschitz, radius_field, radius_floor, RadiusField, DEFAULT_DIVISOR, MIN_DIVISOR,
};
pub use vitali::{overlap_bound, overlap_bound_for_divisor, vitali_cover, AdmissibleCovering, Ball};
pub use weights::{
    check_weight_relative, decaying_weight, weight_from_radius, weight_from_radius_values, weight_integrability,
    Integrability, WeightField, WeightKind,
};

use crate::error::Result;
use crate::mesh::SimplicialManifold;

/// Radius field, Vitali covering and partition of unity in one call.
pub fn build_covering(m: &SimplicialManifold, eps: f64, divisor: f64) -> Result<(RadiusField, AdmissibleCovering)> {
    let rf = radius_field(m, eps, divisor)?;
    let mut cov = vitali_cover(m, &rf)?;
    partition_of_unity(m, &mut cov)?;
    Ok((rf, cov))
}
