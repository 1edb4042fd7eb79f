//! Local charts by intrinsic development.
//!
//! Top simplices around the center are unfolded into Rⁿ one at a time, in
//! order of their farthest vertex, each new vertex placed by trilateration
//! from its already-placed facet. On a flat region this reproduces the flat
//! coordinates exactly. A metric tensor is then fitted at every vertex from
//! the squared lengths of the edges of its star, and the chart is linearly
//! normalized so that the metric at the center is the identity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use serde::Serialize;

use super::SimplicialManifold;
use crate::error::{HodgeError, Result};

type Point = [f64; 3];
type Sym = [[f64; 3]; 3];

const FOLD_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct Chart {
    pub center: usize,
    pub radius: f64,
    /// Member vertices ordered by distance from the center (center first).
    pub members: Vec<usize>,
    /// n coordinates per member.
    pub coordinates: Vec<Vec<f64>>,
    /// Row-major n×n metric per member.
    pub metric: Vec<Vec<f64>>,
    pub epsilon_metric: f64,
    pub epsilon_deriv: f64,
}

impl Chart {
    pub fn dim(&self) -> usize {
        self.coordinates.first().map_or(0, Vec::len)
    }
    pub fn metric_at(&self, k: usize, i: usize, j: usize) -> f64 {
        self.metric[k][i * self.dim() + j]
    }
}

#[derive(PartialEq)]
struct Queued {
    key: f64,
    simplex: usize,
    parent: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key).then_with(|| other.simplex.cmp(&self.simplex))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A development of the neighbourhood of one vertex, reusable for charts of
/// any radius up to the development cap.
#[derive(Clone, Debug)]
pub struct ChartDevelopment {
    center: usize,
    n: usize,
    cap: f64,
    dist: Vec<f64>,
    /// Normalized coordinates.
    pos: Vec<Option<Point>>,
    /// Normalized metric where a fit was possible.
    metric: Vec<Option<Sym>>,
    /// (activation distance, distortion value), sorted by activation.
    metric_events: Vec<(f64, f64)>,
    deriv_events: Vec<(f64, f64)>,
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Places a point at squared distances `sq` from `base` (affinely
/// independent, spanning a hyperplane of Rⁿ), on the side away from `away`.
fn trilaterate(n: usize, base: &[Point], sq: &[f64], away: &Point) -> Point {
    let f0 = base[0];
    let e: Vec<Point> = base[1..].iter().map(|b| sub(b, &f0)).collect();
    let k = e.len();
    let mut g = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = dot(&e[i], &e[j]);
        }
        rhs[i] = 0.5 * (sq[0] + g[(i, i)] - sq[i + 1]);
    }
    let a = g.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k));
    let mut y = [0.0; 3];
    for i in 0..k {
        for c in 0..3 {
            y[c] += a[i] * e[i][c];
        }
    }
    let normal = match n {
        2 => [-e[0][1], e[0][0], 0.0],
        _ => cross(&e[0], &e[1]),
    };
    let nn = dot(&normal, &normal).sqrt();
    let h = (sq[0] - dot(&y, &y)).max(0.0).sqrt();
    let side = dot(&sub(away, &f0), &normal);
    let h = if side > 0.0 { -h } else { h };
    let mut out = [0.0; 3];
    for c in 0..3 {
        out[c] = f0[c] + y[c] + if nn > 0.0 { h * normal[c] / nn } else { 0.0 };
    }
    out
}

/// Places a first simplex with vertex 0 at the origin, vertex i in the span
/// of the first i axes.
fn place_initial(n: usize, sq: impl Fn(usize, usize) -> f64) -> Vec<Point> {
    let mut pts = vec![[0.0; 3]];
    pts.push([sq(0, 1).sqrt(), 0.0, 0.0]);
    for v in 2..=n {
        let base: Vec<Point> = pts.clone();
        let d: Vec<f64> = (0..v).map(|u| sq(u, v)).collect();
        // solve in the span of the first v axes, positive along axis v-1
        let mut away = [0.0; 3];
        away[v - 1] = -1.0;
        let p = trilaterate(v, &base, &d, &away);
        pts.push(p);
    }
    pts
}

/// Largest |eigenvalue − 1| of an n×n symmetric matrix, or ∞ if not
/// positive definite.
fn identity_deviation(n: usize, g: &Sym) -> f64 {
    let eig: Vec<f64> = if n == 2 {
        let (a, b, c) = (g[0][0], g[0][1], g[1][1]);
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c).powi(2) + b * b).sqrt();
        vec![mid - rad, mid + rad]
    } else {
        let m = Matrix3::from_fn(|i, j| g[i][j]);
        SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
    };
    if eig.iter().any(|&l| !(l > 0.0)) {
        return f64::INFINITY;
    }
    eig.iter().map(|l| (l - 1.0).abs()).fold(0.0, f64::max)
}

/// Least-squares metric from edges: ℓ² = Δxᵀ G Δx.
fn fit_metric(n: usize, edges: &[(Point, f64)]) -> Option<Sym> {
    let unknowns = n * (n + 1) / 2;
    if edges.len() < unknowns {
        return None;
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let a = DMatrix::from_fn(edges.len(), unknowns, |r, c| {
        let (i, j) = pairs[c];
        let d = edges[r].0;
        if i == j {
            d[i] * d[i]
        } else {
            2.0 * d[i] * d[j]
        }
    });
    let b = DVector::from_iterator(edges.len(), edges.iter().map(|e| e.1));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.min() < 1e-10 * smax {
        return None;
    }
    let x = svd.solve(&b, 0.0).ok()?;
    let mut g = [[0.0; 3]; 3];
    for (c, &(i, j)) in pairs.iter().enumerate() {
        g[i][j] = x[c];
        g[j][i] = x[c];
    }
    Some(g)
}

impl ChartDevelopment {
    /// Develops the neighbourhood of `center` out to geodesic distance `cap`.
    pub fn new(m: &SimplicialManifold, center: usize, cap: f64) -> Self {
        let n = m.dim();
        let nv = m.num_vertices();
        let max_edge = m.max_edge_length();
        let dist = m.geodesic_distance_within(center, cap);
        let candidate = |t: usize| m.simplex(n, t).iter().all(|&v| dist[v].is_finite());
        let key = |t: usize| m.simplex(n, t).iter().map(|&v| dist[v]).fold(0.0, f64::max);

        let mut raw: Vec<Option<Point>> = vec![None; nv];
        let mut done = vec![false; m.count(n)];
        let start = m
            .star(center)
            .iter()
            .copied()
            .filter(|&t| candidate(t))
            .min_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        let mut heap = BinaryHeap::new();
        if let Some(t0) = start {
            let mut order: Vec<usize> = vec![center];
            order.extend(m.simplex(n, t0).iter().copied().filter(|&v| v != center));
            let sq = |a: usize, b: usize| {
                let e = m.edge_between(order[a], order[b]).expect("simplex edge");
                m.edge_length(e).powi(2)
            };
            for (v, p) in order.iter().zip(place_initial(n, sq)) {
                raw[*v] = Some(p);
            }
            heap.push(Queued { key: key(t0), simplex: t0, parent: usize::MAX });
        }
        while let Some(Queued { simplex: t, parent, .. }) = heap.pop() {
            if done[t] {
                continue;
            }
            let verts = m.simplex(n, t);
            let missing: Vec<usize> = verts.iter().copied().filter(|&v| raw[v].is_none()).collect();
            if missing.len() == 1 && parent != usize::MAX {
                let new = missing[0];
                let base_ids: Vec<usize> = verts.iter().copied().filter(|&v| v != new).collect();
                let base: Vec<Point> = base_ids.iter().map(|&v| raw[v].expect("placed")).collect();
                let sq: Vec<f64> = base_ids
                    .iter()
                    .map(|&v| m.edge_length(m.edge_between(v, new).expect("simplex edge")).powi(2))
                    .collect();
                let away_v = m.simplex(n, parent).iter().copied().find(|v| !verts.contains(v)).expect("opposite vertex");
                let away = raw[away_v].expect("parent placed");
                raw[new] = Some(trilaterate(n, &base, &sq, &away));
            } else if !missing.is_empty() {
                continue;
            }
            done[t] = true;
            for slot in 0..=n {
                let nb = m.top_adjacent(t, slot);
                if !done[nb] && candidate(nb) {
                    heap.push(Queued { key: key(nb), simplex: nb, parent: t });
                }
            }
        }

        // metric fits in raw coordinates, for vertices whose star is complete
        let fit_limit = cap - max_edge;
        let mut raw_metric: Vec<Option<Sym>> = vec![None; nv];
        for v in 0..nv {
            if !(dist[v] < fit_limit) || raw[v].is_none() {
                continue;
            }
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for &t in m.star(v) {
                let s = m.simplex(n, t);
                if s.iter().any(|&u| raw[u].is_none()) {
                    continue;
                }
                for a in 0..s.len() {
                    for b in a + 1..s.len() {
                        edges.push((s[a], s[b]));
                    }
                }
            }
            edges.sort_unstable();
            edges.dedup();
            let samples: Vec<(Point, f64)> = edges
                .iter()
                .map(|&(a, b)| {
                    let d = sub(&raw[b].expect("placed"), &raw[a].expect("placed"));
                    (d, m.edge_length(m.edge_between(a, b).expect("edge")).powi(2))
                })
                .collect();
            raw_metric[v] = fit_metric(n, &samples);
        }

        // normalize: G_c = L Lᵀ, x' = Lᵀ x, G' = L⁻¹ G L⁻ᵀ
        let gc = raw_metric[center].map(|g| DMatrix::from_fn(n, n, |i, j| g[i][j]));
        let chol = gc.and_then(|g| g.cholesky());
        let normalized = chol.is_some();
        let (lt, linv) = match chol {
            Some(c) => {
                let l = c.l();
                let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(n, n));
                (l.transpose(), linv)
            }
            None => (DMatrix::identity(n, n), DMatrix::identity(n, n)),
        };
        let pos: Vec<Option<Point>> = raw
            .iter()
            .map(|p| {
                p.map(|x| {
                    let mut out = [0.0; 3];
                    for i in 0..n {
                        out[i] = (0..n).map(|k| lt[(i, k)] * x[k]).sum();
                    }
                    out
                })
            })
            .collect();
        let mut metric: Vec<Option<Sym>> = raw_metric
            .iter()
            .map(|g| {
                g.map(|g| {
                    let gm = DMatrix::from_fn(n, n, |i, j| g[i][j]);
                    let t = &linv * gm * linv.transpose();
                    let mut out = [[0.0; 3]; 3];
                    for i in 0..n {
                        for j in 0..n {
                            out[i][j] = 0.5 * (t[(i, j)] + t[(j, i)]);
                        }
                    }
                    out
                })
            })
            .collect();
        if normalized {
            let mut id = [[0.0; 3]; 3];
            for (i, row) in id.iter_mut().enumerate().take(n) {
                row[i] = 1.0;
            }
            metric[center] = Some(id);
        }

        let mut metric_events = Vec::new();
        for v in 0..nv {
            if !dist[v].is_finite() {
                continue;
            }
            let value = match (pos[v], metric[v]) {
                (Some(_), Some(g)) => identity_deviation(n, &g),
                _ => f64::INFINITY,
            };
            metric_events.push((dist[v], value));
        }
        // fold-overs: two reached vertices at (almost) the same point
        let mut placed: Vec<(usize, Point)> = (0..nv).filter_map(|v| pos[v].map(|p| (v, p))).collect();
        placed.sort_by(|a, b| a.1[0].total_cmp(&b.1[0]).then(a.0.cmp(&b.0)));
        for i in 0..placed.len() {
            for j in i + 1..placed.len() {
                if placed[j].1[0] - placed[i].1[0] > FOLD_TOLERANCE {
                    break;
                }
                let d = sub(&placed[i].1, &placed[j].1);
                if dot(&d, &d).sqrt() <= FOLD_TOLERANCE {
                    metric_events.push((dist[placed[i].0].max(dist[placed[j].0]), f64::INFINITY));
                }
            }
        }
        let mut deriv_events = Vec::new();
        for e in 0..m.count(1) {
            let s = m.simplex(1, e);
            let (a, b) = (s[0], s[1]);
            if !(dist[a].is_finite() && dist[b].is_finite()) {
                continue;
            }
            let act = dist[a].max(dist[b]);
            let value = match (pos[a], pos[b], metric[a], metric[b]) {
                (Some(pa), Some(pb), Some(ga), Some(gb)) => {
                    let d = sub(&pa, &pb);
                    let len = dot(&d, &d).sqrt();
                    let mut worst: f64 = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            worst = worst.max((ga[i][j] - gb[i][j]).abs());
                        }
                    }
                    if len > FOLD_TOLERANCE {
                        worst / len
                    } else {
                        f64::INFINITY
                    }
                }
                _ => f64::INFINITY,
            };
            deriv_events.push((act, value));
        }
        let by_activation = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
        metric_events.sort_by(by_activation);
        deriv_events.sort_by(by_activation);

        ChartDevelopment { center, n, cap, dist, pos, metric, metric_events, deriv_events }
    }

    pub fn center(&self) -> usize {
        self.center
    }
    pub fn cap(&self) -> f64 {
        self.cap
    }
    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    fn sup_below(events: &[(f64, f64)], radius: f64) -> f64 {
        events.iter().take_while(|e| e.0 < radius).map(|e| e.1).fold(0.0, f64::max)
    }

    /// (ε_metric, ε_deriv) of the chart of the given radius.
    pub fn distortion(&self, radius: f64) -> (f64, f64) {
        (Self::sup_below(&self.metric_events, radius), Self::sup_below(&self.deriv_events, radius))
    }

    /// Supremum of the radii whose chart has both distortions ≤ ε (capped at
    /// the development cap): the activation distance of the first violating
    /// vertex or edge.
    pub fn admissible_extent(&self, eps: f64) -> f64 {
        let first_bad = |events: &[(f64, f64)]| {
            events.iter().find(|e| e.1 > eps && e.0 > 0.0).map_or(f64::INFINITY, |e| e.0)
        };
        first_bad(&self.metric_events).min(first_bad(&self.deriv_events)).min(self.cap)
    }

    pub fn chart(&self, radius: f64) -> Chart {
        let n = self.n;
        let mut members: Vec<usize> = (0..self.dist.len())
            .filter(|&v| v == self.center || self.dist[v] < radius)
            .collect();
        members.sort_by(|&a, &b| self.dist[a].total_cmp(&self.dist[b]).then(a.cmp(&b)));
        let coordinates = members
            .iter()
            .map(|&v| self.pos[v].map_or(vec![f64::NAN; n], |p| p[..n].to_vec()))
            .collect();
        let metric = members
            .iter()
            .map(|&v| {
                self.metric[v].map_or(vec![f64::NAN; n * n], |g| (0..n * n).map(|k| g[k / n][k % n]).collect())
            })
            .collect();
        let (epsilon_metric, epsilon_deriv) = self.distortion(radius);
        Chart { center: self.center, radius, members, coordinates, metric, epsilon_metric, epsilon_deriv }
    }
}

/// Chart of the given radius around `center`.
pub fn normal_chart(m: &SimplicialManifold, center: usize, radius: f64) -> Result<Chart> {
    if center >= m.num_vertices() {
        return Err(HodgeError::InvalidVertex { vertex: center, count: m.num_vertices() });
    }
    if !(radius >= 0.0) {
        return Err(HodgeError::Domain(format!("chart radius must be ≥ 0, got {radius}")));
    }
    let cap = radius.max(1.0) + 2.0 * m.max_edge_length();
    Ok(ChartDevelopment::new(m, center, cap).chart(radius))
}

impl SimplicialManifold {
    pub fn normal_chart(&self, center: usize, radius: f64) -> Result<Chart> {
        normal_chart(self, center, radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_manifold, ManifoldKind};

    #[test]
    fn trilateration_recovers_a_known_point() {
        let base = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let target = [0.3, 0.7, 0.0];
        let sq = [dot(&target, &target), dot(&sub(&target, &base[1]), &sub(&target, &base[1]))];
        let p = trilaterate(2, &base, &sq, &[0.5, -1.0, 0.0]);
        assert!(dot(&sub(&p, &target), &sub(&p, &target)).sqrt() < 1e-12);
    }

    #[test]
    fn metric_fit_is_exact_for_a_quadratic_form() {
        let g = [[2.0, 0.3, 0.0], [0.3, 1.0, 0.0], [0.0, 0.0, 0.0]];
        let dirs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, -2.0, 0.0]];
        let samples: Vec<(Point, f64)> = dirs
            .iter()
            .map(|d| (*d, g[0][0] * d[0] * d[0] + 2.0 * g[0][1] * d[0] * d[1] + g[1][1] * d[1] * d[1]))
            .collect();
        let fit = fit_metric(2, &samples).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((fit[i][j] - g[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_radius_chart_is_the_center_with_identity_metric() {
        let m = generate_test_manifold(ManifoldKind::BumpyTorus, 8, 0.3).unwrap();
        let c = m.normal_chart(5, 0.0).unwrap();
        assert_eq!(c.members, vec![5]);
        assert_eq!(c.metric[0], vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(c.coordinates[0], vec![0.0, 0.0]);
        assert_eq!((c.epsilon_metric, c.epsilon_deriv), (0.0, 0.0));
    }

    #[test]
    fn flat_torus_charts_are_undistorted() {
        let m = generate_test_manifold(ManifoldKind::FlatTorus, 16, 0.0).unwrap();
        let c = m.normal_chart(0, 0.5).unwrap();
        assert!(c.members.len() > 10);
        assert!(c.epsilon_metric < 1e-9 && c.epsilon_deriv < 1e-9, "{c:?}");
    }
}
