//! Shortest-path metric on a linear network, disc-perimeter counts and border distances.
//!
//! [`NetworkMetric`] holds the vertex-to-vertex distance table and is built once per
//! network. [`MetricEngine`] attaches a list of sites (data points and dummy locations)
//! to it. Building the table runs one Dijkstra per vertex, `O(V (E log V))`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{LinearNetwork, NetworkLocation};

/// Relative tolerance (times |L|) for deciding that a location lies exactly at distance r.
pub const PERIMETER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct NetworkMetric {
    net: Arc<LinearNetwork>,
    n: usize,
    table: Vec<f64>,
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    dist: f64,
    vertex: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(net: &LinearNetwork, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; net.n_vertices()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(State {
        dist: 0.0,
        vertex: source,
    });
    while let Some(State { dist: d, vertex }) = heap.pop() {
        if d > dist[vertex] {
            continue;
        }
        for &s in &net.adjacency()[vertex] {
            let (a, b) = net.segments()[s];
            let next = if a == vertex { b } else { a };
            let nd = d + net.segment_length(s);
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(State { dist: nd, vertex: next });
            }
        }
    }
    dist
}

impl NetworkMetric {
    pub fn new(net: Arc<LinearNetwork>) -> Self {
        let n = net.n_vertices();
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|v| dijkstra(&net, v)).collect();
        let table = rows.into_iter().flatten().collect();
        Self { net, n, table }
    }

    pub fn network(&self) -> &Arc<LinearNetwork> {
        &self.net
    }

    /// Shortest-path distance between two vertices; `INFINITY` across components.
    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.table[a * self.n + b]
    }

    /// Largest finite vertex-to-vertex distance. Equals the network diameter, since
    /// shortest-path extremes on a metric graph made of segments are attained at vertices
    /// or are at most half a cycle; for trees it is exact.
    pub fn vertex_diameter(&self) -> f64 {
        self.table.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max)
    }

    /// Distances from a location to its segment's two endpoints, along the segment only.
    fn endpoint_offsets(&self, loc: NetworkLocation) -> [(usize, f64); 2] {
        let (a, b) = self.net.segments()[loc.segment];
        let len = self.net.segment_length(loc.segment);
        [(a, loc.offset), (b, (len - loc.offset).max(0.0))]
    }

    /// Shortest-path distance between two network locations.
    pub fn distance(&self, x: NetworkLocation, y: NetworkLocation) -> f64 {
        let mut best = if x.segment == y.segment {
            (x.offset - y.offset).abs()
        } else {
            f64::INFINITY
        };
        for (e, de) in self.endpoint_offsets(x) {
            for (f, df) in self.endpoint_offsets(y) {
                best = best.min(de + self.vertex_distance(e, f) + df);
            }
        }
        best
    }

    /// Distance from a location to every vertex.
    pub fn distances_to_vertices(&self, loc: NetworkLocation) -> Vec<f64> {
        let [(a, da), (b, db)] = self.endpoint_offsets(loc);
        (0..self.n)
            .map(|v| (da + self.vertex_distance(a, v)).min(db + self.vertex_distance(b, v)))
            .collect()
    }

    /// Distance to the nearest terminal (degree-one) vertex.
    pub fn distance_to_border(&self, loc: NetworkLocation) -> Result<f64> {
        let terminals = self.net.terminal_vertices();
        if terminals.is_empty() {
            return Err(Error::NoBorder);
        }
        let [(a, da), (b, db)] = self.endpoint_offsets(loc);
        Ok(terminals
            .iter()
            .map(|&v| (da + self.vertex_distance(a, v)).min(db + self.vertex_distance(b, v)))
            .fold(f64::INFINITY, f64::min))
    }

    /// Prepares repeated perimeter-count queries around one source location.
    pub fn perimeter_counter(&self, source: NetworkLocation) -> PerimeterCounter<'_> {
        PerimeterCounter {
            metric: self,
            source,
            to_vertex: self.distances_to_vertices(source),
            tol: PERIMETER_TOLERANCE * self.net.total_length(),
        }
    }

    /// Number of network locations lying exactly `r` away from `source`.
    pub fn perimeter_count(&self, source: NetworkLocation, r: f64) -> Result<usize> {
        self.perimeter_counter(source).count(r)
    }
}

/// Counts the circle `{y : d_L(source, y) = r}` for many radii from one source.
pub struct PerimeterCounter<'a> {
    metric: &'a NetworkMetric,
    source: NetworkLocation,
    to_vertex: Vec<f64>,
    tol: f64,
}

/// Roots of `min(d_start + t, d_end + len - t) = r` on `[0, len]`, pushed into `out`.
fn tent_roots(d_start: f64, d_end: f64, len: f64, r: f64, tol: f64, out: &mut Vec<f64>) {
    if !d_start.is_finite() && !d_end.is_finite() {
        return;
    }
    let peak_t = ((d_end + len - d_start) / 2.0).clamp(0.0, len);
    let peak = (d_start + peak_t).min(d_end + len - peak_t);
    if r > peak + tol {
        return;
    }
    if (r - peak).abs() <= tol {
        out.push(peak_t);
        return;
    }
    let rising = r - d_start;
    if rising >= -tol && rising <= peak_t {
        out.push(rising.clamp(0.0, len));
    }
    let falling = d_end + len - r;
    if falling >= peak_t && falling <= len + tol {
        out.push(falling.clamp(0.0, len));
    }
}

impl PerimeterCounter<'_> {
    pub fn source(&self) -> NetworkLocation {
        self.source
    }

    pub fn distance_to_vertex(&self, v: usize) -> f64 {
        self.to_vertex[v]
    }

    /// Shortest-path distance from the source to `loc`.
    pub fn distance_to(&self, loc: NetworkLocation) -> f64 {
        let net = self.metric.network();
        let (p, q) = net.segments()[loc.segment];
        let len = net.segment_length(loc.segment);
        let mut d = (self.to_vertex[p] + loc.offset).min(self.to_vertex[q] + (len - loc.offset).max(0.0));
        if loc.segment == self.source.segment {
            d = d.min((loc.offset - self.source.offset).abs());
        }
        d
    }

    /// `m(u, r)`: interior solutions counted per segment, vertex solutions counted once.
    pub fn count(&self, r: f64) -> Result<usize> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        let net = self.metric.network();
        let mut vertex_hits: Vec<usize> = Vec::new();
        let mut interior = 0usize;
        let mut roots = Vec::with_capacity(2);
        // (start distance, start vertex or None for the source, end distance, end vertex, length)
        let mut pieces: Vec<(f64, Option<usize>, f64, usize, f64)> = Vec::with_capacity(2);
        for (s, &(p, q)) in net.segments().iter().enumerate() {
            let len = net.segment_length(s);
            pieces.clear();
            if s == self.source.segment {
                let t = self.source.offset;
                if t > 0.0 {
                    pieces.push((0.0, None, self.to_vertex[p], p, t));
                }
                if len - t > 0.0 {
                    pieces.push((0.0, None, self.to_vertex[q], q, len - t));
                }
            } else {
                pieces.push((self.to_vertex[p], Some(p), self.to_vertex[q], q, len));
            }
            for &(d0, v0, d1, v1, plen) in &pieces {
                roots.clear();
                tent_roots(d0, d1, plen, r, self.tol, &mut roots);
                roots.dedup_by(|a, b| (*a - *b).abs() <= self.tol);
                for &t in &roots {
                    if t <= self.tol {
                        if let Some(v) = v0 {
                            vertex_hits.push(v);
                        }
                        // a root at the source itself needs r = 0, excluded above
                    } else if t >= plen - self.tol {
                        vertex_hits.push(v1);
                    } else {
                        interior += 1;
                    }
                }
            }
        }
        vertex_hits.sort_unstable();
        vertex_hits.dedup();
        Ok(interior + vertex_hits.len())
    }

    /// Geometric correction weight `1 / m(u, r)`, with the count clamped to at least one.
    pub fn nabla(&self, r: f64) -> f64 {
        match self.count(r) {
            Ok(m) => 1.0 / m.max(1) as f64,
            Err(_) => 1.0,
        }
    }
}

/// Symmetric dense distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i, j) }).collect())
            .collect();
        Self {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// A network metric plus a fixed list of sites.
#[derive(Debug, Clone)]
pub struct MetricEngine {
    metric: Arc<NetworkMetric>,
    sites: Vec<NetworkLocation>,
}

impl MetricEngine {
    pub fn new(metric: Arc<NetworkMetric>, sites: Vec<NetworkLocation>) -> Result<Self> {
        for &s in &sites {
            metric.network().check_location(s)?;
        }
        Ok(Self { metric, sites })
    }

    /// Builds the vertex table and attaches `sites`.
    pub fn build(net: Arc<LinearNetwork>, sites: Vec<NetworkLocation>) -> Result<Self> {
        Self::new(Arc::new(NetworkMetric::new(net)), sites)
    }

    pub fn metric(&self) -> &Arc<NetworkMetric> {
        &self.metric
    }

    pub fn sites(&self) -> &[NetworkLocation] {
        &self.sites
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        self.metric.distance(self.sites[a], self.sites[b])
    }

    pub fn pairwise_distances(&self) -> DistanceMatrix {
        DistanceMatrix::from_fn(self.sites.len(), |i, j| self.distance(i, j))
    }

    pub fn disc_perimeter_count(&self, u: usize, r: f64) -> Result<usize> {
        self.metric.perimeter_count(self.sites[u], r)
    }

    pub fn distance_to_border(&self, u: usize) -> Result<f64> {
        self.metric.distance_to_border(self.sites[u])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine(vertices: Vec<[f64; 2]>, segs: Vec<(usize, usize)>, sites: &[(usize, f64)]) -> MetricEngine {
        let net = Arc::new(LinearNetwork::new(vertices, segs).unwrap());
        let sites = sites.iter().map(|&(s, t)| NetworkLocation::new(s, t)).collect();
        MetricEngine::build(net, sites).unwrap()
    }

    #[test]
    fn same_segment_distance() {
        let e = engine(vec![[0.0, 0.0], [1.0, 0.0]], vec![(0, 1)], &[(0, 0.2), (0, 0.9)]);
        assert!((e.distance(0, 1) - 0.7).abs() < 1e-12);
        assert_eq!(e.distance(1, 1), 0.0);
    }

    #[test]
    fn disconnected_is_infinite() {
        let e = engine(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 5.0], [1.0, 5.0]],
            vec![(0, 1), (2, 3)],
            &[(0, 0.5), (1, 0.5)],
        );
        assert!(e.distance(0, 1).is_infinite());
    }

    #[test]
    fn triangle_direct_edge_beats_two_hops() {
        let h = 3f64.sqrt() / 2.0;
        let e = engine(
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, h]],
            vec![(0, 1), (1, 2), (2, 0)],
            &[(0, 0.0), (0, 1.0)],
        );
        assert!((e.distance(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_loop_routes_around_either_way() {
        // unit square cycle; sites on opposite sides at offsets chosen so the two ways
        // around differ. Route enumeration: 0.2 + 1 + 0.1 = 1.3 versus 0.8 + 1 + 0.9 = 2.7
        let e = engine(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            &[(0, 0.2), (2, 0.9)],
        );
        assert!((e.distance(0, 1) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn pairwise_collinear() {
        let e = engine(
            vec![[0.0, 0.0], [1.0, 0.0]],
            vec![(0, 1)],
            &[(0, 0.0), (0, 0.5), (0, 1.0)],
        );
        let m = e.pairwise_distances();
        assert_eq!(m.row(0), &[0.0, 0.5, 1.0]);
        assert_eq!(m.row(1), &[0.5, 0.0, 0.5]);
        assert_eq!(m.row(2), &[1.0, 0.5, 0.0]);
        let single = engine(vec![[0.0, 0.0], [1.0, 0.0]], vec![(0, 1)], &[(0, 0.3)]);
        assert_eq!(single.pairwise_distances().row(0), &[0.0]);
    }

    #[test]
    fn perimeter_counts_on_long_segment() {
        let e = engine(vec![[0.0, 0.0], [100.0, 0.0]], vec![(0, 1)], &[(0, 50.0)]);
        assert_eq!(e.disc_perimeter_count(0, 10.0).unwrap(), 2);
        assert_eq!(e.disc_perimeter_count(0, 60.0).unwrap(), 0);
        assert_eq!(e.disc_perimeter_count(0, 50.0).unwrap(), 2);
        assert!(matches!(
            e.disc_perimeter_count(0, 0.0),
            Err(Error::NonPositiveRadius(_))
        ));
    }

    #[test]
    fn perimeter_count_at_vertex_equals_degree() {
        let e = engine(
            vec![[0.0, 0.0], [1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]],
            vec![(0, 1), (0, 2), (0, 3)],
            &[(1, 0.0), (0, 0.5)],
        );
        assert_eq!(e.disc_perimeter_count(0, 0.1).unwrap(), 3);
        assert_eq!(e.disc_perimeter_count(1, 0.1).unwrap(), 2);
        // from the middle of arm 0, radius 0.5 hits the hub once: (hub) + far end of arm 0
        assert_eq!(e.disc_perimeter_count(1, 0.5).unwrap(), 2);
        // radius 0.7 reaches 0.2 into arms 1 and 2; arm 0 end is at 0.5 only
        assert_eq!(e.disc_perimeter_count(1, 0.7).unwrap(), 2);
    }

    #[test]
    fn border_distances() {
        let e = engine(vec![[0.0, 0.0], [1.0, 0.0]], vec![(0, 1)], &[(0, 0.3)]);
        assert!((e.distance_to_border(0).unwrap() - 0.3).abs() < 1e-12);
        let star = engine(
            vec![
                [0.0, 0.0],
                [1.0, 0.0],
                [-0.5, 0.75f64.sqrt()],
                [-0.5, -(0.75f64.sqrt())],
            ],
            vec![(0, 1), (0, 2), (0, 3)],
            &[(0, 0.0)],
        );
        assert!((star.distance_to_border(0).unwrap() - 1.0).abs() < 1e-12);
        let h = 3f64.sqrt() / 2.0;
        let tri = engine(
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, h]],
            vec![(0, 1), (1, 2), (2, 0)],
            &[(0, 0.5)],
        );
        assert!(matches!(tri.distance_to_border(0), Err(Error::NoBorder)));
    }
}
