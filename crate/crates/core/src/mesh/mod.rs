//! Closed simplicial manifolds of dimension 2 or 3 with piecewise-flat metric.

mod chart;
mod generate;
mod geodesic;
mod off;

use std::collections::{BTreeSet, HashMap};

use crate::error::{HodgeError, Result};

pub use chart::{Chart, ChartDevelopment};
pub use generate::{generate_test_manifold, ManifoldKind};
pub use off::{load_mesh, parse_off, save_mesh, write_off};

/// Vertex lists of the simplices of one degree, each sorted ascending.
#[derive(Clone, Debug)]
struct SimplexList {
    arity: usize,
    verts: Vec<usize>,
}

impl SimplexList {
    fn len(&self) -> usize {
        self.verts.len() / self.arity
    }
    fn get(&self, i: usize) -> &[usize] {
        &self.verts[i * self.arity..(i + 1) * self.arity]
    }
}

#[derive(Clone, Debug)]
pub struct SimplicialManifold {
    dim: usize,
    ambient: usize,
    coords: Vec<f64>,
    simplices: Vec<SimplexList>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    /// `faces[p]` for p ≥ 1: per p-simplex, its p+1 faces `(index, sign)`.
    faces: Vec<Vec<(usize, i8)>>,
    /// `cofaces[p]` for p < n: per p-simplex, the (p+1)-simplices containing it.
    cofaces: Vec<Vec<Vec<(usize, i8)>>>,
    /// Sign of the manifold orientation relative to the sorted vertex order.
    top_orientation: Vec<i8>,
    /// Per top simplex, the neighbour across the facet opposite each vertex slot.
    top_adjacent: Vec<usize>,
    neighbors: Vec<Vec<(usize, usize)>>,
    star: Vec<Vec<usize>>,
    edge_lengths: Vec<f64>,
    volumes: Vec<Vec<f64>>,
    support: Vec<Vec<f64>>,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn permutation_parity(v: &[usize]) -> i8 {
    let mut sign = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn subsets(verts: &[usize], size: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(verts: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..verts.len() {
            cur.push(verts[i]);
            rec(verts, size, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(verts, size, 0, &mut Vec::with_capacity(size), out);
}

/// p-volume of a simplex from its squared edge lengths, `sq(i, j)` for i < j.
pub fn simplex_volume_from_lengths(k: usize, sq: impl Fn(usize, usize) -> f64) -> f64 {
    let p = k - 1;
    if p == 0 {
        return 1.0;
    }
    let mut g = nalgebra::DMatrix::<f64>::zeros(p, p);
    for i in 1..=p {
        for j in 1..=p {
            g[(i - 1, j - 1)] = if i == j {
                sq(0, i)
            } else {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                0.5 * (sq(0, i) + sq(0, j) - sq(a, b))
            };
        }
    }
    let det = g.determinant().max(0.0);
    let fact: f64 = (1..=p).map(|i| i as f64).product();
    det.sqrt() / fact
}

impl SimplicialManifold {
    /// Builds the manifold from vertex coordinates and oriented top simplices,
    /// validates it, and rescales so that the edge-graph diameter is 2.
    pub fn from_top_simplices(coords: Vec<Vec<f64>>, tops: Vec<Vec<usize>>) -> Result<Self> {
        let mut m = Self::build(coords, tops)?;
        let diam = m.graph_diameter();
        if diam > 0.0 {
            m.rescale(2.0 / diam);
        }
        Ok(m)
    }

    /// As [`Self::from_top_simplices`] without diameter normalization.
    pub fn from_top_simplices_unnormalized(coords: Vec<Vec<f64>>, tops: Vec<Vec<usize>>) -> Result<Self> {
        Self::build(coords, tops)
    }

    fn build(coords: Vec<Vec<f64>>, tops: Vec<Vec<usize>>) -> Result<Self> {
        let nv = coords.len();
        let first = tops.first().ok_or(HodgeError::Parse { line: 0, message: "no simplices".into() })?;
        let n = first.len().saturating_sub(1);
        if !(2..=3).contains(&n) {
            return Err(HodgeError::UnsupportedDimension(n));
        }
        let ambient = coords.first().map_or(0, Vec::len);
        if ambient == 0 || coords.iter().any(|c| c.len() != ambient) {
            return Err(HodgeError::Parse { line: 0, message: "inconsistent coordinate dimension".into() });
        }
        for t in &tops {
            if t.len() != n + 1 {
                return Err(HodgeError::Parse { line: 0, message: "mixed simplex sizes".into() });
            }
            for &v in t {
                if v >= nv {
                    return Err(HodgeError::InvalidVertex { vertex: v, count: nv });
                }
            }
            let distinct: BTreeSet<_> = t.iter().collect();
            if distinct.len() != t.len() {
                return Err(HodgeError::Parse { line: 0, message: format!("repeated vertex in simplex {t:?}") });
            }
        }

        let mut oriented: Vec<(Vec<usize>, i8)> = tops
            .iter()
            .map(|t| {
                let mut s = t.clone();
                s.sort_unstable();
                (s, permutation_parity(t))
            })
            .collect();
        oriented.sort();
        for w in oriented.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(HodgeError::NonManifold { facet: w[0].0.clone(), count: 0 });
            }
        }

        let mut simplices = Vec::with_capacity(n + 1);
        let mut index: Vec<HashMap<Vec<usize>, usize>> = Vec::with_capacity(n + 1);
        let mut used = vec![false; nv];
        for (t, _) in &oriented {
            for &v in t {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(HodgeError::Parse { line: 0, message: format!("vertex {v} belongs to no simplex") });
        }
        simplices.push(SimplexList { arity: 1, verts: (0..nv).collect() });
        index.push((0..nv).map(|v| (vec![v], v)).collect());
        for p in 1..n {
            let mut set = BTreeSet::new();
            let mut buf = Vec::new();
            for (t, _) in &oriented {
                buf.clear();
                subsets(t, p + 1, &mut buf);
                set.extend(buf.drain(..));
            }
            let list: Vec<Vec<usize>> = set.into_iter().collect();
            index.push(list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect());
            simplices.push(SimplexList { arity: p + 1, verts: list.concat() });
        }
        index.push(oriented.iter().enumerate().map(|(i, (s, _))| (s.clone(), i)).collect());
        simplices.push(SimplexList { arity: n + 1, verts: oriented.iter().flat_map(|(s, _)| s.clone()).collect() });
        let top_orientation: Vec<i8> = oriented.iter().map(|(_, o)| *o).collect();

        let mut faces = vec![Vec::new()];
        for p in 1..=n {
            let list = &simplices[p];
            let mut f = Vec::with_capacity(list.len() * (p + 1));
            for i in 0..list.len() {
                let s = list.get(i);
                for omit in 0..=p {
                    let face: Vec<usize> = s.iter().enumerate().filter(|&(k, _)| k != omit).map(|(_, &v)| v).collect();
                    let sign = if omit % 2 == 0 { 1 } else { -1 };
                    f.push((index[p - 1][&face], sign));
                }
            }
            faces.push(f);
        }
        let mut cofaces: Vec<Vec<Vec<(usize, i8)>>> = (0..n).map(|p| vec![Vec::new(); simplices[p].len()]).collect();
        for p in 1..=n {
            for i in 0..simplices[p].len() {
                for &(f, s) in &faces[p][i * (p + 1)..(i + 1) * (p + 1)] {
                    cofaces[p - 1][f].push((i, s));
                }
            }
        }

        // closed manifold and orientation checks
        let nt = simplices[n].len();
        let mut top_adjacent = vec![usize::MAX; nt * (n + 1)];
        for (fi, co) in cofaces[n - 1].iter().enumerate() {
            let facet = simplices[n - 1].get(fi).to_vec();
            if co.len() != 2 {
                return Err(HodgeError::NonManifold { facet, count: co.len() });
            }
            let (a, sa) = co[0];
            let (b, sb) = co[1];
            if top_orientation[a] * sa != -(top_orientation[b] * sb) {
                return Err(HodgeError::InconsistentOrientation { facet });
            }
            for (t, other) in [(a, b), (b, a)] {
                let slot = (0..=n).find(|&k| faces[n][t * (n + 1) + k].0 == fi).expect("facet of its coface");
                top_adjacent[t * (n + 1) + slot] = other;
            }
        }

        let mut neighbors = vec![Vec::new(); nv];
        for e in 0..simplices[1].len() {
            let s = simplices[1].get(e);
            neighbors[s[0]].push((s[1], e));
            neighbors[s[1]].push((s[0], e));
        }
        let mut star = vec![Vec::new(); nv];
        for t in 0..nt {
            for &v in simplices[n].get(t) {
                star[v].push(t);
            }
        }

        let mut m = SimplicialManifold {
            dim: n,
            ambient,
            coords: coords.concat(),
            simplices,
            index,
            faces,
            cofaces,
            top_orientation,
            top_adjacent,
            neighbors,
            star,
            edge_lengths: Vec::new(),
            volumes: Vec::new(),
            support: Vec::new(),
        };
        let components = m.component_count();
        if components != 1 {
            return Err(HodgeError::Disconnected { components });
        }
        m.compute_metric();
        let mean = m.volumes[n].iter().sum::<f64>() / nt as f64;
        let threshold = 1e-12 * mean;
        if let Some((t, &v)) = m.volumes[n].iter().enumerate().find(|&(_, &v)| !(v >= threshold) || v == 0.0) {
            return Err(HodgeError::DegenerateSimplex { simplex: t, volume: v, threshold });
        }
        Ok(m)
    }

    fn component_count(&self) -> usize {
        let nv = self.num_vertices();
        let mut seen = vec![false; nv];
        let mut count = 0;
        for s in 0..nv {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    fn compute_metric(&mut self) {
        let n = self.dim;
        self.edge_lengths = (0..self.count(1))
            .map(|e| {
                let s = self.simplex(1, e);
                let (a, b) = (self.coord(s[0]), self.coord(s[1]));
                a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
            })
            .collect();
        self.volumes = (0..=n)
            .map(|p| {
                (0..self.count(p))
                    .map(|i| {
                        let s = self.simplex(p, i);
                        simplex_volume_from_lengths(p + 1, |a, b| self.length(s[a], s[b]).powi(2))
                    })
                    .collect()
            })
            .collect();
        let top = &self.volumes[n];
        self.support = (0..=n)
            .map(|p| {
                let share = binomial(n + 1, p + 1) as f64;
                let mut acc = vec![0.0; self.count(p)];
                for (t, &vol) in top.iter().enumerate() {
                    let s = self.simplex(n, t);
                    let mut buf = Vec::new();
                    subsets(s, p + 1, &mut buf);
                    for sub in buf {
                        acc[self.index[p][&sub]] += vol / share;
                    }
                }
                acc
            })
            .collect();
    }

    fn rescale(&mut self, factor: f64) {
        self.coords.iter_mut().for_each(|c| *c *= factor);
        self.compute_metric();
    }

    fn length(&self, a: usize, b: usize) -> f64 {
        let e = self.edge_between(a, b).expect("edge of a simplex");
        self.edge_lengths[e]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }
    pub fn num_vertices(&self) -> usize {
        self.simplices[0].len()
    }
    /// Number of p-simplices (0 for p > n).
    pub fn count(&self, p: usize) -> usize {
        self.simplices.get(p).map_or(0, SimplexList::len)
    }
    pub fn counts(&self) -> Vec<usize> {
        (0..=self.dim).map(|p| self.count(p)).collect()
    }
    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim).map(|p| if p % 2 == 0 { self.count(p) as i64 } else { -(self.count(p) as i64) }).sum()
    }
    /// Sorted vertex list of a p-simplex.
    pub fn simplex(&self, p: usize, i: usize) -> &[usize] {
        self.simplices[p].get(i)
    }
    pub fn find_simplex(&self, verts: &[usize]) -> Option<usize> {
        let mut key = verts.to_vec();
        key.sort_unstable();
        self.index.get(key.len().checked_sub(1)?)?.get(&key).copied()
    }
    /// Faces of a p-simplex with incidence signs (p ≥ 1).
    pub fn faces(&self, p: usize, i: usize) -> &[(usize, i8)] {
        &self.faces[p][i * (p + 1)..(i + 1) * (p + 1)]
    }
    /// (p+1)-simplices containing a p-simplex, with incidence signs.
    pub fn cofaces(&self, p: usize, i: usize) -> &[(usize, i8)] {
        &self.cofaces[p][i]
    }
    pub fn top_orientation(&self, t: usize) -> i8 {
        self.top_orientation[t]
    }
    /// Top simplex across the facet opposite vertex slot `slot` of `t`.
    pub fn top_adjacent(&self, t: usize, slot: usize) -> usize {
        self.top_adjacent[t * (self.dim + 1) + slot]
    }
    pub fn coord(&self, v: usize) -> &[f64] {
        &self.coords[v * self.ambient..(v + 1) * self.ambient]
    }
    pub fn coords(&self) -> Vec<Vec<f64>> {
        self.coords.chunks(self.ambient).map(<[f64]>::to_vec).collect()
    }
    /// `(neighbour, edge)` pairs.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.neighbors[v]
    }
    /// Top simplices containing `v`.
    pub fn star(&self, v: usize) -> &[usize] {
        &self.star[v]
    }
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.neighbors[a].iter().find(|&&(w, _)| w == b).map(|&(_, e)| e)
    }
    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }
    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }
    pub fn mean_edge_length(&self) -> f64 {
        self.edge_lengths.iter().sum::<f64>() / self.edge_lengths.len() as f64
    }
    pub fn max_edge_length(&self) -> f64 {
        self.edge_lengths.iter().copied().fold(0.0, f64::max)
    }
    /// p-volume of a p-simplex (1 for vertices).
    pub fn volume(&self, p: usize, i: usize) -> f64 {
        self.volumes[p][i]
    }
    pub fn volumes(&self, p: usize) -> &[f64] {
        &self.volumes[p]
    }
    /// Barycentric dual n-volume attached to a p-simplex.
    pub fn support_volume(&self, p: usize, i: usize) -> f64 {
        self.support[p][i]
    }
    pub fn support_volumes(&self, p: usize) -> &[f64] {
        &self.support[p]
    }
    pub fn dual_volume(&self, v: usize) -> f64 {
        self.support[0][v]
    }
    pub fn total_volume(&self) -> f64 {
        self.volumes[self.dim].iter().sum()
    }
    /// Diagonal of the lumped degree-p mass matrix.
    pub fn mass(&self, p: usize) -> Vec<f64> {
        self.support[p].iter().zip(&self.volumes[p]).map(|(s, v)| s / (v * v)).collect()
    }

    /// Checks ∂∘∂ = 0 in integer arithmetic; returns the largest absolute entry.
    pub fn boundary_composition_defect(&self) -> i64 {
        let mut worst = 0;
        for p in 2..=self.dim {
            for i in 0..self.count(p) {
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for &(f, s) in self.faces(p, i) {
                    for &(g, t) in self.faces(p - 1, f) {
                        *acc.entry(g).or_insert(0) += i64::from(s) * i64::from(t);
                    }
                }
                worst = acc.values().map(|v| v.abs()).fold(worst, i64::max);
            }
        }
        worst
    }

    /// Integer incidence rows of d_p (rows indexed by (p+1)-simplices).
    pub fn coboundary_rows(&self, p: usize) -> Vec<Vec<(usize, i64)>> {
        if p >= self.dim {
            return Vec::new();
        }
        (0..self.count(p + 1))
            .map(|i| self.faces(p + 1, i).iter().map(|&(f, s)| (f, i64::from(s))).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tetrahedron_boundary() -> SimplicialManifold {
        let coords = vec![
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, -1.0],
            vec![-1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ];
        let tops = vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]];
        SimplicialManifold::from_top_simplices(coords, tops).unwrap()
    }

    #[test]
    fn tetrahedron_boundary_is_a_sphere() {
        let m = tetrahedron_boundary();
        assert_eq!(m.counts(), vec![4, 6, 4]);
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.boundary_composition_defect(), 0);
        // every edge has length = diameter = 2 after normalization
        assert!(m.edge_lengths().iter().all(|&l| (l - 2.0).abs() < 1e-12));
    }

    #[test]
    fn support_volumes_sum_to_total_in_every_degree() {
        let m = tetrahedron_boundary();
        for p in 0..=2 {
            let s: f64 = m.support_volumes(p).iter().sum();
            assert!((s - m.total_volume()).abs() < 1e-12);
        }
    }

    #[test]
    fn flipped_triangle_is_rejected() {
        let coords = vec![
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, -1.0],
            vec![-1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ];
        let tops = vec![vec![0, 2, 1], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]];
        assert!(matches!(
            SimplicialManifold::from_top_simplices(coords, tops),
            Err(HodgeError::InconsistentOrientation { .. })
        ));
    }

    #[test]
    fn open_surface_is_not_a_closed_manifold() {
        let coords = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert!(matches!(
            SimplicialManifold::from_top_simplices(coords, vec![vec![0, 1, 2]]),
            Err(HodgeError::NonManifold { count: 1, .. })
        ));
    }

    #[test]
    fn triangle_volume_from_lengths() {
        // 3-4-5 right triangle
        let sq = |a: usize, b: usize| match (a, b) {
            (0, 1) => 9.0,
            (0, 2) => 16.0,
            _ => 25.0,
        };
        assert!((simplex_volume_from_lengths(3, sq) - 6.0).abs() < 1e-12);
    }
}
