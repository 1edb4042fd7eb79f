use serde::Serialize;

use crate::covering::{AdmissibleCovering, Ball};
use crate::dec::Cochain;
use crate::error::{HodgeError, Result};
use crate::mesh::SimplicialManifold;

const NONE: usize = usize::MAX;

/// One covering ball viewed as a domain with boundary.
///
/// A simplex is interior when all its vertices are ball members. Boundary
/// vertices are non-members adjacent to a member; a boundary simplex has
/// only member or boundary vertices and is not interior. Cochains on the
/// patch vanish off the interior.
#[derive(Clone, Debug, Serialize)]
pub struct Patch {
    pub ball: usize,
    pub center: usize,
    pub radius: f64,
    pub member_mask: Vec<bool>,
    /// Members together with the adjacent ring of boundary vertices.
    pub closure_mask: Vec<bool>,
    /// Global indices of interior p-simplices, per degree.
    pub interior: Vec<Vec<usize>>,
    /// Global indices of boundary p-simplices, per degree.
    pub boundary: Vec<Vec<usize>>,
    #[serde(skip)]
    local: Vec<Vec<usize>>,
}

impl Patch {
    pub fn new(m: &SimplicialManifold, ball_index: usize, ball: &Ball) -> Result<Self> {
        let nv = m.num_vertices();
        let member_mask = ball.mask(nv);
        if !member_mask.iter().any(|&b| b) {
            return Err(HodgeError::Ball { ball: ball_index, message: "no interior simplex".into() });
        }
        let closure_mask: Vec<bool> =
            (0..nv).map(|v| member_mask[v] || m.neighbors(v).iter().any(|&(w, _)| member_mask[w])).collect();
        let mut interior = Vec::with_capacity(m.dim() + 1);
        let mut boundary = Vec::with_capacity(m.dim() + 1);
        let mut local = Vec::with_capacity(m.dim() + 1);
        for p in 0..=m.dim() {
            let mut inner = Vec::new();
            let mut outer = Vec::new();
            let mut map = vec![NONE; m.count(p)];
            for i in 0..m.count(p) {
                let s = m.simplex(p, i);
                if s.iter().all(|&v| member_mask[v]) {
                    map[i] = inner.len();
                    inner.push(i);
                } else if s.iter().all(|&v| closure_mask[v]) {
                    outer.push(i);
                }
            }
            interior.push(inner);
            boundary.push(outer);
            local.push(map);
        }
        Ok(Patch {
            ball: ball_index,
            center: ball.center,
            radius: ball.radius,
            member_mask,
            closure_mask,
            interior,
            boundary,
            local,
        })
    }

    pub fn dof(&self, p: usize) -> usize {
        self.interior[p].len()
    }

    pub fn has_boundary(&self) -> bool {
        !self.boundary[0].is_empty()
    }

    /// Local index of a global interior simplex.
    pub fn local_index(&self, p: usize, global: usize) -> Option<usize> {
        let l = self.local[p][global];
        (l != NONE).then_some(l)
    }

    /// Interior values of a global cochain.
    pub fn restrict(&self, omega: &Cochain) -> Vec<f64> {
        self.interior[omega.degree].iter().map(|&i| omega.values[i]).collect()
    }

    /// Zero extension of interior values to a global cochain.
    pub fn extend(&self, p: usize, values: &[f64]) -> Cochain {
        let mut out = vec![0.0; self.local[p].len()];
        for (&g, &v) in self.interior[p].iter().zip(values) {
            out[g] = v;
        }
        Cochain { degree: p, values: out }
    }

    /// Every face of an interior simplex is interior or on the boundary.
    pub fn is_face_closed(&self, m: &SimplicialManifold) -> bool {
        (1..=m.dim()).all(|p| {
            self.interior[p].iter().all(|&i| {
                m.faces(p, i).iter().all(|&(f, _)| {
                    self.local[p - 1][f] != NONE || self.boundary[p - 1].binary_search(&f).is_ok()
                })
            })
        })
    }
}

pub fn extract_patch(m: &SimplicialManifold, cov: &AdmissibleCovering, j: usize) -> Result<Patch> {
    let ball = cov
        .balls
        .get(j)
        .ok_or_else(|| HodgeError::Domain(format!("ball index {j} out of range ({} balls)", cov.len())))?;
    Patch::new(m, j, ball)
}
