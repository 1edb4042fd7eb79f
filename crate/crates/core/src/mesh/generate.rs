//! Test manifolds: flat and bumpy 2-tori, icosahedral spheres, flat 3-tori.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimplicialManifold;
use crate::error::{HodgeError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    FlatTorus,
    Sphere,
    BumpyTorus,
    /// Tetrahedral flat 3-torus.
    FlatTorus3,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::FlatTorus => "flat_torus",
            Self::Sphere => "sphere",
            Self::BumpyTorus => "bumpy_torus",
            Self::FlatTorus3 => "flat_torus3",
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManifoldKind {
    type Err = HodgeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat_torus" => Ok(Self::FlatTorus),
            "sphere" => Ok(Self::Sphere),
            "bumpy_torus" => Ok(Self::BumpyTorus),
            "flat_torus3" => Ok(Self::FlatTorus3),
            other => Err(HodgeError::Domain(format!("unknown manifold kind '{other}'"))),
        }
    }
}

/// Generates a test manifold, normalized to edge-graph diameter 2.
///
/// `resolution` is the grid size N for tori. For spheres the icosahedron is
/// subdivided with frequency `max(1, round(N/√10))`, which keeps the vertex
/// count close to N²: a resolution-16 sphere has 252 vertices.
pub fn generate_test_manifold(kind: ManifoldKind, resolution: usize, distortion: f64) -> Result<SimplicialManifold> {
    if !(4..=256).contains(&resolution) {
        return Err(HodgeError::ResolutionOutOfRange(resolution));
    }
    if !(distortion >= 0.0) || !distortion.is_finite() {
        return Err(HodgeError::Domain(format!("distortion must be finite and ≥ 0, got {distortion}")));
    }
    let (coords, tops) = match kind {
        ManifoldKind::FlatTorus => torus2(resolution, 0.0),
        ManifoldKind::BumpyTorus => torus2(resolution, distortion),
        ManifoldKind::Sphere => icosphere(sphere_frequency(resolution)),
        ManifoldKind::FlatTorus3 => torus3(resolution),
    };
    SimplicialManifold::from_top_simplices(coords, tops)
}

pub(crate) fn sphere_frequency(resolution: usize) -> usize {
    ((resolution as f64 / 10f64.sqrt()).round() as usize).max(1)
}

fn circle(t: f64) -> [f64; 2] {
    let a = 2.0 * PI * t;
    [a.cos() / (2.0 * PI), a.sin() / (2.0 * PI)]
}

/// Product-of-circles embedding in R⁴ (intrinsically flat), optionally
/// scaled radially by 1 + a·sin²(πu)sin²(πv).
fn torus2(n: usize, amplitude: f64) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let idx = |i: usize, j: usize| (i % n) + n * (j % n);
    let mut coords = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            let bump = (PI * u).sin().powi(2) * (PI * v).sin().powi(2);
            let scale = 1.0 + amplitude * bump;
            let (a, b) = (circle(u), circle(v));
            coords.push(vec![scale * a[0], scale * a[1], scale * b[0], scale * b[1]]);
        }
    }
    let mut tops = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            tops.push(vec![a, b, c]);
            tops.push(vec![a, c, d]);
        }
    }
    (coords, tops)
}

/// Kuhn triangulation of the cube grid (6 tetrahedra per cube), embedded in
/// R⁶ as a product of three circles.
fn torus3(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let idx = |c: [usize; 3]| (c[0] % n) + n * (c[1] % n) + n * n * (c[2] % n);
    let mut coords = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let mut c = Vec::with_capacity(6);
                for t in [i, j, k] {
                    c.extend(circle(t as f64 / n as f64));
                }
                coords.push(c);
            }
        }
    }
    const PERMS: [([usize; 3], bool); 6] = [
        ([0, 1, 2], false),
        ([0, 2, 1], true),
        ([1, 0, 2], true),
        ([1, 2, 0], false),
        ([2, 0, 1], false),
        ([2, 1, 0], true),
    ];
    let mut tops = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for (perm, odd) in PERMS {
                    let mut cur = [i, j, k];
                    let mut tet = vec![idx(cur)];
                    for axis in perm {
                        cur[axis] += 1;
                        tet.push(idx(cur));
                    }
                    if odd {
                        tet.swap(2, 3);
                    }
                    tops.push(tet);
                }
            }
        }
    }
    (coords, tops)
}

fn icosphere(freq: usize) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let base: [[f64; 3]; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut coords: Vec<Vec<f64>> = Vec::new();
    let mut lookup: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut tops = Vec::with_capacity(20 * freq * freq);
    for face in faces {
        let [a, b, c] = oriented_outward(face, &base);
        let mut grid = vec![vec![0usize; freq + 1]; freq + 1];
        for i in 0..=freq {
            for j in 0..=freq - i {
                let weights = [(a, freq - i - j), (b, i), (c, j)];
                let mut key: Vec<(usize, usize)> = weights.iter().copied().filter(|&(_, w)| w > 0).collect();
                key.sort_unstable();
                let id = *lookup.entry(key).or_insert_with(|| {
                    let mut p = [0.0; 3];
                    for (v, w) in weights {
                        for (pk, bk) in p.iter_mut().zip(base[v]) {
                            *pk += w as f64 * bk;
                        }
                    }
                    let nrm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                    coords.push(p.iter().map(|x| x / nrm).collect());
                    coords.len() - 1
                });
                grid[i][j] = id;
            }
        }
        for i in 0..freq {
            for j in 0..freq - i {
                tops.push(vec![grid[i][j], grid[i + 1][j], grid[i][j + 1]]);
                if i + j + 1 < freq {
                    tops.push(vec![grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]]);
                }
            }
        }
    }
    (coords, tops)
}

fn oriented_outward(face: [usize; 3], base: &[[f64; 3]; 12]) -> [usize; 3] {
    let [a, b, c] = face.map(|i| base[i]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let nrm = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    if nrm[0] * a[0] + nrm[1] * a[1] + nrm[2] * a[2] > 0.0 {
        face
    } else {
        [face[0], face[2], face[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_torus_counts() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 8, 0.0).unwrap();
        assert_eq!(m.counts(), vec![64, 192, 128]);
        assert_eq!(m.euler_characteristic(), 0);
    }

    #[test]
    fn sphere_counts_follow_frequency() {
        let m = generate_test_manifold(ManifoldKind::Sphere, 4, 0.0).unwrap();
        assert_eq!(m.counts(), vec![12, 30, 20]);
        let m = generate_test_manifold(ManifoldKind::Sphere, 16, 0.0).unwrap();
        assert_eq!(m.counts(), vec![252, 750, 500]);
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn flat_three_torus_is_closed() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus3, 4, 0.0).unwrap();
        assert_eq!(m.counts(), vec![64, 448, 768, 384]);
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_composition_defect(), 0);
    }

    #[test]
    fn resolution_is_range_checked() {
        assert!(matches!(
            generate_test_manifold(ManifoldKind::FlatTorus, 3, 0.0),
            Err(HodgeError::ResolutionOutOfRange(3))
        ));
        assert!(generate_test_manifold(ManifoldKind::FlatTorus, 257, 0.0).is_err());
    }

    #[test]
    fn kinds_parse_from_names() {
        for k in [ManifoldKind::FlatTorus, ManifoldKind::Sphere, ManifoldKind::BumpyTorus, ManifoldKind::FlatTorus3] {
            assert_eq!(k.name().parse::<ManifoldKind>().unwrap(), k);
        }
        assert!("klein_bottle".parse::<ManifoldKind>().is_err());
    }
}
