//! Shortest-path distances on the weighted edge graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SimplicialManifold;
use crate::par;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const EXACT_DIAMETER_LIMIT: usize = 4096;

impl SimplicialManifold {
    /// Distances from `source` to every vertex.
    pub fn geodesic_distance(&self, source: usize) -> Vec<f64> {
        self.multi_source_distance(&[(source, 0.0)], f64::INFINITY)
    }

    /// Distances from `source`, exploring only up to `cutoff`; farther
    /// vertices are left at +∞.
    pub fn geodesic_distance_within(&self, source: usize, cutoff: f64) -> Vec<f64> {
        self.multi_source_distance(&[(source, 0.0)], cutoff)
    }

    /// min over sources s of (offset_s + d(s, ·)), truncated at `cutoff`.
    pub fn multi_source_distance(&self, sources: &[(usize, f64)], cutoff: f64) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.num_vertices()];
        let mut heap = BinaryHeap::new();
        for &(s, d0) in sources {
            if d0 < dist[s] {
                dist[s] = d0;
                heap.push(Entry(d0, s));
            }
        }
        while let Some(Entry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, e) in self.neighbors(v) {
                let nd = d + self.edge_length(e);
                if nd < dist[w] && nd <= cutoff {
                    dist[w] = nd;
                    heap.push(Entry(nd, w));
                }
            }
        }
        dist
    }

    /// Edge-graph diameter: exact all-sources sweep on small meshes,
    /// double-sweep lower bound otherwise.
    pub fn graph_diameter(&self) -> f64 {
        let nv = self.num_vertices();
        if nv <= EXACT_DIAMETER_LIMIT {
            par::map_range(nv, |s| self.geodesic_distance(s).into_iter().fold(0.0, f64::max))
                .into_iter()
                .fold(0.0, f64::max)
        } else {
            let d0 = self.geodesic_distance(0);
            let far = argmax(&d0);
            let d1 = self.geodesic_distance(far);
            let far2 = argmax(&d1);
            let d2 = self.geodesic_distance(far2);
            d1[far2].max(d2.into_iter().fold(0.0, f64::max))
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0))).map_or(0, |(i, _)| i)
}
