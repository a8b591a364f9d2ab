//! Linear networks: a finite union of straight, pre-noded line segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar coordinate pair.
pub type Point = [f64; 2];

/// Relative tolerance used for vertex coincidence, scaled by the bounding-box diagonal.
pub const VERTEX_TOLERANCE: f64 = 1e-9;

pub(crate) fn euclidean(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A position on a network: a segment and the arc length from its first endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkLocation {
    pub segment: usize,
    pub offset: f64,
}

impl NetworkLocation {
    pub fn new(segment: usize, offset: f64) -> Self {
        Self { segment, offset }
    }
}

/// Immutable linear network. Segments must already be split at every intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearNetwork {
    vertices: Vec<Point>,
    segments: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
    total_length: f64,
    diagonal: f64,
}

impl LinearNetwork {
    /// Validates the vertex and segment lists and caches lengths and adjacency.
    pub fn new(vertices: Vec<Point>, segments: Vec<(usize, usize)>) -> Result<Self> {
        if vertices.is_empty() || segments.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let n = vertices.len();
        for (s, &(a, b)) in segments.iter().enumerate() {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::DanglingIndex {
                        segment: s,
                        vertex: v,
                        n_vertices: n,
                    });
                }
            }
            if a == b {
                return Err(Error::ZeroLengthSegment(s));
            }
        }
        let diagonal = bbox_diagonal(&vertices);
        let tol = VERTEX_TOLERANCE * diagonal.max(f64::MIN_POSITIVE);
        if let Some((i, j)) = find_coincident(&vertices, tol) {
            return Err(Error::DuplicateVertex(i, j));
        }

        let lengths: Vec<f64> = segments
            .iter()
            .map(|&(a, b)| euclidean(vertices[a], vertices[b]))
            .collect();
        if let Some(s) = lengths.iter().position(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(Error::ZeroLengthSegment(s));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (s, &(a, b)) in segments.iter().enumerate() {
            adjacency[a].push(s);
            adjacency[b].push(s);
        }
        let total_length = lengths.iter().sum();
        Ok(Self {
            vertices,
            segments,
            lengths,
            adjacency,
            total_length,
            diagonal,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn segments(&self) -> &[(usize, usize)] {
        &self.segments
    }

    pub fn segment_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn segment_length(&self, segment: usize) -> f64 {
        self.lengths[segment]
    }

    /// Incident segment ids per vertex.
    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_segments(&self) -> usize {
        self.segments.len()
    }

    /// |L|, the summed segment length.
    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn bbox_diagonal(&self) -> f64 {
        self.diagonal
    }

    /// (xmin, xmax, ymin, ymax) of the vertex set.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        bounding_box(&self.vertices)
    }

    /// Vertices with exactly one incident segment.
    pub fn terminal_vertices(&self) -> Vec<usize> {
        self.adjacency
            .iter()
            .enumerate()
            .filter(|(_, inc)| inc.len() == 1)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn check_location(&self, loc: NetworkLocation) -> Result<()> {
        let ok = loc.segment < self.segments.len()
            && loc.offset.is_finite()
            && loc.offset >= 0.0
            && loc.offset <= self.lengths[loc.segment] * (1.0 + 1e-12);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidLocation {
                segment: loc.segment,
                offset: loc.offset,
            })
        }
    }

    /// Planar embedding of a network location.
    pub fn embed(&self, loc: NetworkLocation) -> Point {
        let (a, b) = self.segments[loc.segment];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let t = loc.offset / self.lengths[loc.segment];
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    }

    /// Nearest network location to `p`. Ties go to the lowest segment index, then the
    /// lowest offset.
    pub fn snap(&self, p: Point) -> NetworkLocation {
        self.snap_with_distance(p).0
    }

    /// As [`snap`](Self::snap), also returning the Euclidean snap displacement.
    pub fn snap_with_distance(&self, p: Point) -> (NetworkLocation, f64) {
        let tie = 1e-12 * self.diagonal;
        let mut best = (NetworkLocation::new(0, 0.0), f64::INFINITY);
        for (s, &(a, b)) in self.segments.iter().enumerate() {
            let (offset, d) = project(p, self.vertices[a], self.vertices[b], self.lengths[s]);
            let better = d < best.1 - tie || (d <= best.1 + tie && s == best.0.segment && offset < best.0.offset);
            if better {
                best = (NetworkLocation::new(s, offset), d);
            }
        }
        best
    }

    /// Per segment, `ceil(length / spacing)` locations at the midpoints of equal sub-intervals.
    pub fn dummy_grid(&self, spacing: f64) -> Result<Vec<NetworkLocation>> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::NonPositiveSpacing(spacing));
        }
        let mut out = Vec::new();
        for (s, &len) in self.lengths.iter().enumerate() {
            let k = ((len / spacing).ceil() as usize).max(1);
            let step = len / k as f64;
            out.extend((0..k).map(|i| NetworkLocation::new(s, (i as f64 + 0.5) * step)));
        }
        Ok(out)
    }

    /// Returns a copy with every coordinate multiplied by `factor` and shifted by `shift`.
    pub fn transformed(&self, factor: f64, shift: Point) -> Result<Self> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| [v[0] * factor + shift[0], v[1] * factor + shift[1]])
            .collect();
        Self::new(vertices, self.segments.clone())
    }
}

/// Offset along segment a->b of the orthogonal projection of p (clamped), and its distance.
fn project(p: Point, a: Point, b: Point, len: f64) -> (f64, f64) {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (len * len)).clamp(0.0, 1.0);
    let q = [a[0] + t * dx, a[1] + t * dy];
    (t * len, euclidean(p, q))
}

pub(crate) fn bounding_box(points: &[Point]) -> (f64, f64, f64, f64) {
    points.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(x0, x1, y0, y1), p| (x0.min(p[0]), x1.max(p[0]), y0.min(p[1]), y1.max(p[1])),
    )
}

fn bbox_diagonal(points: &[Point]) -> f64 {
    let (x0, x1, y0, y1) = bounding_box(points);
    (x1 - x0).hypot(y1 - y0)
}

/// First pair of points closer than `tol`, found through a uniform hash grid.
pub(crate) fn find_coincident(points: &[Point], tol: f64) -> Option<(usize, usize)> {
    use std::collections::HashMap;
    let cell = tol.max(f64::MIN_POSITIVE) * 2.0;
    let key = |p: Point| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in points.iter().enumerate() {
        let (cx, cy) = key(p);
        for gx in cx - 1..=cx + 1 {
            for gy in cy - 1..=cy + 1 {
                if let Some(bucket) = grid.get(&(gx, gy)) {
                    if let Some(&j) = bucket.iter().find(|&&j| euclidean(points[j], p) <= tol) {
                        return Some((j, i));
                    }
                }
            }
        }
        grid.entry((cx, cy)).or_default().push(i);
    }
    None
}
