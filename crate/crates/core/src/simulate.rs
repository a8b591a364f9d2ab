//! Point-process, labelling and mark-model simulation, plus a dendrite-like network generator.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::NetworkMetric;
use crate::network::{LinearNetwork, NetworkLocation, Point};
use crate::pattern::MarkedPattern;
use crate::window::Window;

/// A seed plus a replicate index; each pair selects an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn draw_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean > 0.0 {
        Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    }
}

/// `n` independent uniform locations; segments chosen proportionally to length.
pub fn uniform_locations<R: Rng + ?Sized>(net: &LinearNetwork, n: usize, rng: &mut R) -> Vec<NetworkLocation> {
    let mut cum = Vec::with_capacity(net.n_segments());
    let mut acc = 0.0;
    for &l in net.segment_lengths() {
        acc += l;
        cum.push(acc);
    }
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let s = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
            let start = if s == 0 { 0.0 } else { cum[s - 1] };
            let len = net.segment_length(s);
            NetworkLocation::new(s, (u - start).clamp(0.0, len))
        })
        .collect()
}

/// Exactly `n` uniform points on the network.
pub fn uniform_on_network<R: Rng + ?Sized>(metric: &Arc<NetworkMetric>, n: usize, rng: &mut R) -> MarkedPattern {
    let locs = uniform_locations(metric.network(), n, rng);
    MarkedPattern::on_network(metric.clone(), locs).expect("uniform locations are valid")
}

/// Homogeneous Poisson process with intensity `lambda` per unit length.
pub fn poisson_on_network<R: Rng + ?Sized>(metric: &Arc<NetworkMetric>, lambda: f64, rng: &mut R) -> MarkedPattern {
    let n = draw_count(lambda * metric.network().total_length(), rng);
    uniform_on_network(metric, n, rng)
}

/// Exactly `n` uniform points in the window, by rejection from its bounding box.
pub fn binomial_planar<R: Rng + ?Sized>(window: &Window, n: usize, rng: &mut R) -> MarkedPattern {
    let (x0, x1, y0, y1) = window.bbox();
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let p = [
            x0 + rng.random::<f64>() * (x1 - x0),
            y0 + rng.random::<f64>() * (y1 - y0),
        ];
        if window.contains(p) {
            pts.push(p);
        }
    }
    MarkedPattern::planar(window.clone(), pts).expect("rejection keeps points inside")
}

/// Homogeneous Poisson process with intensity `lambda` per unit area.
pub fn poisson_planar<R: Rng + ?Sized>(window: &Window, lambda: f64, rng: &mut R) -> MarkedPattern {
    let n = draw_count(lambda * window.area(), rng);
    binomial_planar(window, n, rng)
}

/// Applies one uniformly random permutation to types, marks and second marks alike.
pub fn random_label<R: Rng + ?Sized>(p: &MarkedPattern, rng: &mut R) -> Result<MarkedPattern> {
    if p.types().is_none() && p.marks().is_none() {
        return Err(Error::NoMarks);
    }
    let mut perm: Vec<usize> = (0..p.n()).collect();
    perm.shuffle(rng);
    let apply = |v: Option<&[f64]>| v.map(|v| perm.iter().map(|&i| v[i]).collect());
    Ok(p.relabelled(
        p.types().map(|t| perm.iter().map(|&i| t[i]).collect()),
        apply(p.marks()),
        apply(p.second_marks()),
    ))
}

/// Permutes the first and second marks independently of each other.
pub fn random_label_independent<R: Rng + ?Sized>(p: &MarkedPattern, rng: &mut R) -> Result<MarkedPattern> {
    let m1 = p.marks().ok_or(Error::NoMarks)?;
    let mut a = m1.to_vec();
    a.shuffle(rng);
    let b = p.second_marks().map(|m| {
        let mut b = m.to_vec();
        b.shuffle(rng);
        b
    });
    let types = p.types().map(|t| {
        let mut t = t.to_vec();
        t.shuffle(rng);
        t
    });
    Ok(p.relabelled(types, Some(a), b))
}

/// Deterministic mark models on network patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkModel {
    /// `(x + y) / scale` of the planar embedding
    I,
    /// shortest-path distance to the nearest terminal vertex
    II,
    /// number of other points closer than `radius` along the network
    III,
}

impl MarkModel {
    pub const ALL: [MarkModel; 3] = [MarkModel::I, MarkModel::II, MarkModel::III];

    pub fn name(self) -> &'static str {
        match self {
            MarkModel::I => "I",
            MarkModel::II => "II",
            MarkModel::III => "III",
        }
    }
}

impl fmt::Display for MarkModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MarkModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(MarkModel::I),
            "II" | "2" => Ok(MarkModel::II),
            "III" | "3" => Ok(MarkModel::III),
            _ => Err(Error::Config(format!("unknown mark model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub scale: f64,
    pub radius: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            scale: 5000.0,
            radius: 80.0,
        }
    }
}

/// Marks a network pattern according to `model`.
pub fn mark_model(p: &MarkedPattern, model: MarkModel, params: ModelParams) -> Result<MarkedPattern> {
    let metric = p.metric()?;
    let marks: Vec<f64> = match model {
        MarkModel::I => p.coords().iter().map(|c| (c[0] + c[1]) / params.scale).collect(),
        MarkModel::II => p
            .locations()
            .iter()
            .map(|&l| metric.distance_to_border(l))
            .collect::<Result<_>>()?,
        MarkModel::III => {
            let table = p.network_pairs()?;
            (0..p.n())
                .map(|i| table.row(i).iter().filter(|q| q.dist < params.radius).count() as f64)
                .collect()
        }
    };
    p.with_replaced_marks(marks)
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0 && r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    crate::network::euclidean(p, [a[0] + t * dx, a[1] + t * dy])
}

const MAX_ATTEMPTS: usize = 200;
const BRANCH_ATTEMPTS: usize = 50;

/// Planar binary tree: the root splits into two branches and every branch tip splits again,
/// `depth` levels in total. Branch lengths shrink by `length_decay` per level, with jitter.
/// A branch that would touch the existing tree is redrawn; a tree that cannot be completed is
/// discarded and regenerated.
pub fn dendrite_like_network<R: Rng + ?Sized>(
    depth: usize,
    branch_angle: f64,
    length_decay: f64,
    rng: &mut R,
) -> Result<LinearNetwork> {
    if depth == 0 {
        return Err(Error::Config("dendrite depth must be at least 1".into()));
    }
    if !(length_decay > 0.0) || !(branch_angle > 0.0 && branch_angle < PI) {
        return Err(Error::Config("invalid dendrite branch angle or length decay".into()));
    }
    let base = 100.0;
    for _ in 0..MAX_ATTEMPTS {
        let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
        let mut segments: Vec<(usize, usize)> = Vec::new();
        // (vertex, heading)
        let mut tips = vec![(0usize, PI / 2.0)];
        let mut ok = true;
        'levels: for level in 0..depth {
            let mut next = Vec::with_capacity(tips.len() * 2);
            for &(v, heading) in &tips {
                for side in [-1.0, 1.0] {
                    let from = vertices[v];
                    let mut placed = None;
                    for _ in 0..BRANCH_ATTEMPTS {
                        let spread = 0.5 * branch_angle * rng.random_range(0.7..1.3);
                        let angle = heading + side * spread;
                        let len = base * length_decay.powi(level as i32) * rng.random_range(0.75..1.25);
                        let to = [from[0] + len * angle.cos(), from[1] + len * angle.sin()];
                        let clash = segments
                            .iter()
                            .any(|&(a, b)| a != v && b != v && segments_cross(vertices[a], vertices[b], from, to))
                            || vertices.iter().any(|&w| crate::network::euclidean(w, to) < 0.05 * len)
                            || segments
                                .iter()
                                .any(|&(a, b)| point_segment_distance(to, vertices[a], vertices[b]) < 0.05 * len);
                        if !clash {
                            placed = Some((to, angle));
                            break;
                        }
                    }
                    let Some((to, angle)) = placed else {
                        ok = false;
                        break 'levels;
                    };
                    vertices.push(to);
                    let w = vertices.len() - 1;
                    segments.push((v, w));
                    next.push((w, angle));
                }
            }
            tips = next;
        }
        if ok {
            return LinearNetwork::new(vertices, segments);
        }
    }
    Err(Error::GenerationFailed(MAX_ATTEMPTS))
}
