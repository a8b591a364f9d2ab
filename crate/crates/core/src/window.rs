//! Planar observation windows: axis-aligned rectangles and simple polygons.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{bounding_box, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Window {
    Rectangle {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    /// Simple polygon, vertices in either orientation, not closed (first != last).
    Polygon(Vec<Point>),
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Sutherland-Hodgman clipping of `subject` against a convex counter-clockwise `clip`.
fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let side = |p: Point| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            let cross = |p: Point, q: Point, sp: f64, sq: f64| {
                let t = sp / (sp - sq);
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
            };
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(cross(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(cross(prev, cur, sp, sc));
            }
        }
    }
    output
}

impl Window {
    pub fn rectangle(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if !(xmax > xmin && ymax > ymin) || ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidWindow(format!(
                "degenerate rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Window::Rectangle { xmin, xmax, ymin, ymax })
    }

    pub fn unit_square() -> Self {
        Window::Rectangle {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        }
    }

    /// Polygon window, stored counter-clockwise.
    pub fn polygon(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidWindow("polygon needs at least 3 vertices".into()));
        }
        let area = shoelace(&vertices);
        if !(area.abs() > 0.0) {
            return Err(Error::InvalidWindow("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Window::Polygon(vertices))
    }

    /// Smallest rectangle holding all points, padded by `pad` on each side.
    pub fn bounding(points: &[Point], pad: f64) -> Result<Self> {
        let (x0, x1, y0, y1) = bounding_box(points);
        Self::rectangle(x0 - pad, x1 + pad, y0 - pad, y1 + pad)
    }

    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        match self {
            Window::Rectangle { xmin, xmax, ymin, ymax } => (*xmin, *xmax, *ymin, *ymax),
            Window::Polygon(v) => bounding_box(v),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Window::Rectangle { xmin, xmax, ymin, ymax } => (xmax - xmin) * (ymax - ymin),
            Window::Polygon(v) => shoelace(v),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Window::Rectangle { xmin, xmax, ymin, ymax } => {
                p[0] >= *xmin && p[0] <= *xmax && p[1] >= *ymin && p[1] <= *ymax
            }
            Window::Polygon(v) => {
                let n = v.len();
                let mut inside = false;
                for i in 0..n {
                    let (a, b) = (v[i], v[(i + 1) % n]);
                    if point_segment_distance(p, a, b) == 0.0 {
                        return true;
                    }
                    if (a[1] > p[1]) != (b[1] > p[1]) {
                        let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                        if p[0] < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// Distance from an interior point to the window boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self {
            Window::Rectangle { xmin, xmax, ymin, ymax } => {
                (p[0] - xmin).min(xmax - p[0]).min(p[1] - ymin).min(ymax - p[1])
            }
            Window::Polygon(v) => (0..v.len())
                .map(|i| point_segment_distance(p, v[i], v[(i + 1) % v.len()]))
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn is_convex(poly: &[Point]) -> bool {
        let n = poly.len();
        (0..n).all(|i| {
            let (a, b, c) = (poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
            (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) >= 0.0
        })
    }

    /// Translation correction `|W| / |W ∩ (W + v)|`.
    pub fn translation_weight(&self, v: Point) -> Result<f64> {
        let overlap = match self {
            Window::Rectangle { xmin, xmax, ymin, ymax } => {
                ((xmax - xmin) - v[0].abs()).max(0.0) * ((ymax - ymin) - v[1].abs()).max(0.0)
            }
            Window::Polygon(poly) => {
                if !Self::is_convex(poly) {
                    return Err(Error::UnsupportedCorrection("translation"));
                }
                let moved: Vec<Point> = poly.iter().map(|p| [p[0] + v[0], p[1] + v[1]]).collect();
                let clipped = clip_convex(&moved, poly);
                if clipped.len() < 3 {
                    0.0
                } else {
                    shoelace(&clipped).abs()
                }
            }
        };
        Ok(if overlap > 0.0 {
            self.area() / overlap
        } else {
            f64::INFINITY
        })
    }

    /// Ripley's isotropic correction: inverse share of the circle of radius `r` around `u`
    /// that falls inside the window. Rectangles only.
    pub fn isotropic_weight(&self, u: Point, r: f64) -> Result<f64> {
        let Window::Rectangle { xmin, xmax, ymin, ymax } = *self else {
            return Err(Error::UnsupportedCorrection("isotropic"));
        };
        if r <= 0.0 {
            return Ok(1.0);
        }
        // outward normal direction and distance for each edge
        let edges = [
            (0.0, xmax - u[0]),
            (PI / 2.0, ymax - u[1]),
            (PI, u[0] - xmin),
            (1.5 * PI, u[1] - ymin),
        ];
        let mut arcs: Vec<(f64, f64)> = Vec::new();
        for (dir, d) in edges {
            if d < r {
                let half = (d.max(0.0) / r).acos();
                let lo = (dir - half).rem_euclid(2.0 * PI);
                let hi = lo + 2.0 * half;
                if hi > 2.0 * PI {
                    arcs.push((lo, 2.0 * PI));
                    arcs.push((0.0, hi - 2.0 * PI));
                } else {
                    arcs.push((lo, hi));
                }
            }
        }
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut outside = 0.0;
        let mut current: Option<(f64, f64)> = None;
        for (lo, hi) in arcs {
            current = match current {
                Some((clo, chi)) if lo <= chi => Some((clo, chi.max(hi))),
                Some((clo, chi)) => {
                    outside += chi - clo;
                    Some((lo, hi))
                }
                None => Some((lo, hi)),
            };
        }
        if let Some((clo, chi)) = current {
            outside += chi - clo;
        }
        let inside = 1.0 - outside / (2.0 * PI);
        Ok(if inside > 0.0 { 1.0 / inside } else { f64::INFINITY })
    }

    /// Cell-centre quadrature nodes inside the window on an `n x n` grid over its box,
    /// with the cell area as common weight.
    pub fn quadrature(&self, n: usize) -> (Vec<Point>, f64) {
        let (x0, x1, y0, y1) = self.bbox();
        let (dx, dy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        let mut nodes = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let p = [x0 + (i as f64 + 0.5) * dx, y0 + (j as f64 + 0.5) * dy];
                if self.contains(p) {
                    nodes.push(p);
                }
            }
        }
        (nodes, dx * dy)
    }

    /// Share of an axis-aligned Gaussian kernel centred at `u` that lies inside the window.
    pub fn gaussian_mass(&self, u: Point, sx: f64, sy: f64) -> f64 {
        match self {
            Window::Rectangle { xmin, xmax, ymin, ymax } => {
                let fx = normal_cdf((xmax - u[0]) / sx) - normal_cdf((xmin - u[0]) / sx);
                let fy = normal_cdf((ymax - u[1]) / sy) - normal_cdf((ymin - u[1]) / sy);
                fx * fy
            }
            Window::Polygon(_) => {
                let (nodes, cell) = self.quadrature(128);
                let norm = 1.0 / (2.0 * PI * sx * sy);
                nodes
                    .iter()
                    .map(|p| {
                        let (zx, zy) = ((p[0] - u[0]) / sx, (p[1] - u[1]) / sy);
                        norm * (-0.5 * (zx * zx + zy * zy)).exp()
                    })
                    .sum::<f64>()
                    * cell
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_poly() -> Window {
        Window::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    #[test]
    fn areas_and_orientation() {
        assert_eq!(Window::unit_square().area(), 1.0);
        let p = square_poly();
        assert!((p.area() - 1.0).abs() < 1e-15);
        assert!(p.contains([0.5, 0.5]));
        assert!(!p.contains([1.5, 0.5]));
    }

    #[test]
    fn translation_weights_agree_between_representations() {
        let r = Window::unit_square();
        let p = square_poly();
        for v in [[0.1, 0.2], [-0.3, 0.05], [0.0, 0.0]] {
            let a = r.translation_weight(v).unwrap();
            let b = p.translation_weight(v).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let l = Window::polygon(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ])
        .unwrap();
        assert!(l.translation_weight([0.1, 0.1]).is_err());
    }

    #[test]
    fn isotropic_interior_and_corner() {
        let w = Window::unit_square();
        assert_eq!(w.isotropic_weight([0.5, 0.5], 0.2).unwrap(), 1.0);
        // on an edge midpoint: half the circle is outside
        assert!((w.isotropic_weight([0.5, 0.0], 0.2).unwrap() - 2.0).abs() < 1e-12);
        // at a corner with small radius: a quarter inside
        assert!((w.isotropic_weight([0.0, 0.0], 0.2).unwrap() - 4.0).abs() < 1e-12);
        assert!(square_poly().isotropic_weight([0.5, 0.5], 0.1).is_err());
    }

    #[test]
    fn isotropic_matches_numeric_circle_scan() {
        let w = Window::unit_square();
        for (u, r) in [([0.1, 0.15], 0.3), ([0.9, 0.5], 0.45), ([0.05, 0.95], 0.5)] {
            let n = 200_000;
            let inside = (0..n)
                .filter(|k| {
                    let a = 2.0 * PI * (*k as f64 + 0.5) / n as f64;
                    w.contains([u[0] + r * a.cos(), u[1] + r * a.sin()])
                })
                .count() as f64
                / n as f64;
            let wt = w.isotropic_weight(u, r).unwrap();
            assert!((1.0 / wt - inside).abs() < 1e-4);
        }
    }

    #[test]
    fn gaussian_mass_rectangle_vs_quadrature() {
        let r = Window::unit_square();
        let p = square_poly();
        let u = [0.1, 0.7];
        let a = r.gaussian_mass(u, 0.1, 0.15);
        let b = p.gaussian_mass(u, 0.1, 0.15);
        assert!((a - b).abs() < 2e-3, "{a} {b}");
    }
}
