use serde::Serialize;

use crate::covering::AdmissibleCovering;
use crate::dec::Cochain;
use crate::mesh::SimplicialManifold;

#[derive(Clone, Debug, Serialize)]
pub struct SupportCheck {
    /// The allowed region is a strict subset of the manifold.
    pub applicable: bool,
    pub holds: bool,
    /// Vertices of the allowed region.
    pub region_size: usize,
}

fn support_vertices(m: &SimplicialManifold, c: &Cochain) -> Vec<bool> {
    let mut mask = vec![false; m.num_vertices()];
    for (i, &x) in c.values.iter().enumerate() {
        if x != 0.0 {
            for &v in m.simplex(c.degree, i) {
                mask[v] = true;
            }
        }
    }
    mask
}

/// Members of every ball meeting the 1-ring of `region`.
fn covering_layer(m: &SimplicialManifold, cov: &AdmissibleCovering, region: &[bool]) -> Vec<bool> {
    let mut ring = region.to_vec();
    for v in 0..m.num_vertices() {
        if region[v] {
            for &(w, _) in m.neighbors(v) {
                ring[w] = true;
            }
        }
    }
    let mut out = region.to_vec();
    for b in &cov.balls {
        if b.members.iter().any(|&x| ring[x]) {
            for &x in &b.members {
                out[x] = true;
            }
        }
    }
    out
}

/// supp v and supp ω̃ lie within `steps + 1` covering layers around supp ω.
pub fn compact_support_check(
    m: &SimplicialManifold,
    cov: &AdmissibleCovering,
    omega: &Cochain,
    v: &Cochain,
    tilde: &Cochain,
    steps: usize,
) -> SupportCheck {
    let mut region = support_vertices(m, omega);
    for _ in 0..=steps {
        region = covering_layer(m, cov, &region);
    }
    let region_size = region.iter().filter(|&&b| b).count();
    let applicable = region_size < m.num_vertices();
    let inside = |c: &Cochain| support_vertices(m, c).iter().zip(&region).all(|(&s, &r)| !s || r);
    let holds = !applicable || (inside(v) && inside(tilde));
    SupportCheck { applicable, holds, region_size }
}
