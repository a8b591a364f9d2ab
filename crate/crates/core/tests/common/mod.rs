#![allow(dead_code)]

pub mod collapse;
pub mod identities;

use std::sync::Arc;

use linmark::{LinearNetwork, NetworkLocation, NetworkMetric, Point};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    linmark::RngSpec::new(seed, stream).rng()
}

/// Connected network on `n` random vertices in the unit square: a random tree plus a few
/// chords. Segments may cross geometrically without sharing a vertex.
pub fn random_network(n: usize, rng: &mut ChaCha8Rng) -> LinearNetwork {
    let vertices: Vec<Point> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let mut segments = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        seen.insert((u, v));
        segments.push((u, v));
    }
    let extra = rng.random_range(0..=n / 2);
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let key = (a.min(b), a.max(b));
        if a != b && seen.insert(key) {
            segments.push(key);
        }
    }
    LinearNetwork::new(vertices, segments).expect("random network is valid")
}

pub fn random_location(net: &LinearNetwork, rng: &mut ChaCha8Rng) -> NetworkLocation {
    let s = rng.random_range(0..net.n_segments());
    NetworkLocation::new(s, rng.random::<f64>() * net.segment_length(s))
}

pub fn metric(net: LinearNetwork) -> Arc<NetworkMetric> {
    Arc::new(NetworkMetric::new(Arc::new(net)))
}

/// Weighted graph with every site inserted as an extra node splitting its segment.
pub struct Augmented {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
    /// node index of each site
    pub site_node: Vec<usize>,
}

pub fn augment(net: &LinearNetwork, sites: &[NetworkLocation]) -> Augmented {
    let nv = net.n_vertices();
    let mut edges = Vec::new();
    let site_node: Vec<usize> = (0..sites.len()).map(|k| nv + k).collect();
    for (s, &(a, b)) in net.segments().iter().enumerate() {
        let len = net.segment_length(s);
        let mut on: Vec<(f64, usize)> = sites
            .iter()
            .enumerate()
            .filter(|(_, l)| l.segment == s)
            .map(|(k, l)| (l.offset, site_node[k]))
            .collect();
        on.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut prev = (0.0, a);
        for (t, node) in on {
            edges.push((prev.1, node, t - prev.0));
            prev = (t, node);
        }
        edges.push((prev.1, b, len - prev.0));
    }
    Augmented {
        n_nodes: nv + sites.len(),
        edges,
        site_node,
    }
}

/// Dense all-pairs shortest paths by Floyd-Warshall.
pub fn floyd_warshall(g: &Augmented) -> Vec<Vec<f64>> {
    let n = g.n_nodes;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in &g.edges {
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Number of locations at distance exactly `r` from `u`, by scanning every edge of the
/// augmented graph at spacing `res` and counting sign changes of `d(y) - r`.
pub fn scan_perimeter_count(net: &LinearNetwork, u: NetworkLocation, r: f64, res: f64) -> usize {
    let g = augment(net, &[u]);
    let d = floyd_warshall(&g);
    let src = &d[g.site_node[0]];
    let mut count = 0;
    for &(a, b, len) in &g.edges {
        if len <= 0.0 {
            continue;
        }
        let k = (len / res).ceil().max(1.0) as usize;
        let f = |t: f64| (src[a] + t).min(src[b] + len - t) - r;
        let mut prev = f(0.0);
        for i in 1..=k {
            let t = if i == k { len } else { len * i as f64 / k as f64 };
            let cur = f(t);
            if (prev < 0.0) != (cur < 0.0) {
                count += 1;
            }
            prev = cur;
        }
    }
    count
}

/// Single segment `[0, len]` along the x axis.
pub fn segment(len: f64) -> Arc<NetworkMetric> {
    metric(LinearNetwork::new(vec![[0.0, 0.0], [len, 0.0]], vec![(0, 1)]).unwrap())
}

/// Number of points at distance `r` from `x` inside `[0, len]`.
pub fn interval_perimeter(x: f64, r: f64, len: f64) -> usize {
    usize::from(x - r >= 0.0) + usize::from(x + r <= len)
}

pub fn epanechnikov(x: f64, h: f64) -> f64 {
    let u = x / h;
    if u.abs() < 1.0 {
        0.75 * (1.0 - u * u) / h
    } else {
        0.0
    }
}

pub fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length");
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        if x.is_nan() && y.is_nan() {
            continue;
        }
        let scale = 1.0f64.max(x.abs()).max(y.abs());
        assert!((x - y).abs() <= tol * scale, "{what}[{k}]: {x} vs {y}");
    }
}
