//! First-order intensity estimates on windows and networks.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::NetworkMetric;
use crate::network::{NetworkLocation, Point};
use crate::pattern::{MarkedPattern, Support, Target};
use crate::window::Window;

const NORMALIZATION_GRID: usize = 128;
const INFIMUM_GRID: usize = 64;

#[derive(Debug, Clone)]
enum Kind {
    Constant(f64),
    Supplied,
    Planar {
        window: Window,
        centres: Vec<Point>,
        sigma: [f64; 2],
        scale: f64,
    },
    Lixel {
        metric: Arc<NetworkMetric>,
        /// per segment: number of lixels and the index of its first lixel
        layout: Vec<(usize, usize)>,
        values: Vec<f64>,
    },
}

/// How to estimate intensity on a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkIntensityMode {
    Constant,
    Supplied,
    LixelKernel,
}

/// An intensity function together with its values at every point of the pattern it was built for.
#[derive(Debug, Clone)]
pub struct IntensitySurface {
    kind: Kind,
    at_points: Vec<f64>,
    infimum: f64,
    bandwidth: Option<f64>,
}

impl IntensitySurface {
    /// The same value everywhere.
    pub fn constant(p: &MarkedPattern, value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveIntensity);
        }
        Ok(Self {
            kind: Kind::Constant(value),
            at_points: vec![value; p.n()],
            infimum: value,
            bandwidth: None,
        })
    }

    /// `n_target / |domain|`.
    pub fn homogeneous(p: &MarkedPattern, target: Target) -> Result<Self> {
        let n = p.indices(target)?.len();
        Self::constant(p, n as f64 / p.domain_measure())
    }

    /// User-provided values at every data point.
    pub fn supplied(p: &MarkedPattern, values: Vec<f64>) -> Result<Self> {
        if values.len() != p.n() {
            return Err(Error::IntensityLength {
                expected: p.n(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositiveIntensity);
        }
        let infimum = values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            kind: Kind::Supplied,
            at_points: values,
            infimum,
            bandwidth: None,
        })
    }

    /// Gaussian kernel estimate of the intensity of `target` with uniform edge correction,
    /// renormalized to integrate to the number of target points.
    /// Without a bandwidth, Scott's rule is applied per coordinate.
    pub fn kernel_planar(p: &MarkedPattern, target: Target, bandwidth: Option<f64>) -> Result<Self> {
        let window = p.window()?.clone();
        let idx = p.indices(target)?;
        let centres: Vec<Point> = idx.iter().map(|&i| p.coords()[i]).collect();
        let sigma = match bandwidth {
            Some(h) if h > 0.0 && h.is_finite() => [h, h],
            Some(h) => return Err(Error::NonPositiveBandwidth(h)),
            None => scott(&centres, &window),
        };
        let mut kind = Kind::Planar {
            window: window.clone(),
            centres,
            sigma,
            scale: 1.0,
        };
        let (nodes, cell) = window.quadrature(NORMALIZATION_GRID);
        let raw: f64 = nodes.iter().map(|&u| eval_planar(&kind, u)).sum::<f64>() * cell;
        if let Kind::Planar { scale, .. } = &mut kind {
            *scale = idx.len() as f64 / raw;
        }
        let at_points: Vec<f64> = p.coords().iter().map(|&u| eval_planar(&kind, u)).collect();
        let (grid, _) = window.quadrature(INFIMUM_GRID);
        let infimum = grid
            .iter()
            .map(|&u| eval_planar(&kind, u))
            .chain(idx.iter().map(|&i| at_points[i]))
            .fold(f64::INFINITY, f64::min);
        let out = Self {
            kind,
            at_points,
            infimum,
            bandwidth: Some(sigma[0].max(sigma[1])),
        };
        out.check_positive(&idx)?;
        Ok(out)
    }

    /// Intensity on a network; `supplied` is required in supplied mode.
    /// The lixel kernel defaults to bandwidth `|L| / 50`.
    pub fn network(
        p: &MarkedPattern,
        target: Target,
        mode: NetworkIntensityMode,
        supplied: Option<Vec<f64>>,
        bandwidth: Option<f64>,
    ) -> Result<Self> {
        let metric = p.metric()?.clone();
        match mode {
            NetworkIntensityMode::Constant => Self::homogeneous(p, target),
            NetworkIntensityMode::Supplied => Self::supplied(p, supplied.ok_or(Error::MissingSuppliedValues)?),
            NetworkIntensityMode::LixelKernel => {
                let net = metric.network().clone();
                let sigma = match bandwidth {
                    None => net.total_length() / 50.0,
                    Some(h) if h > 0.0 && h.is_finite() => h,
                    Some(h) => return Err(Error::NonPositiveBandwidth(h)),
                };
                let idx = p.indices(target)?;
                let spacing = (sigma / 4.0).max(net.total_length() / 20_000.0);
                let mut layout = Vec::with_capacity(net.n_segments());
                let mut mids = Vec::new();
                let mut widths = Vec::new();
                for s in 0..net.n_segments() {
                    let len = net.segment_length(s);
                    let k = (len / spacing).ceil().max(1.0) as usize;
                    layout.push((k, mids.len()));
                    let w = len / k as f64;
                    for i in 0..k {
                        mids.push(NetworkLocation::new(s, (i as f64 + 0.5) * w));
                        widths.push(w);
                    }
                }
                let lixel_of = |loc: NetworkLocation| lixel_index(&layout, &net, loc);
                let mut counts = vec![0usize; mids.len()];
                for &i in &idx {
                    counts[lixel_of(p.locations()[i])] += 1;
                }
                let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
                let mut values = vec![0.0; mids.len()];
                for (h, &c) in counts.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let counter = metric.perimeter_counter(mids[h]);
                    for (g, v) in values.iter_mut().enumerate() {
                        let d = counter.distance_to(mids[g]);
                        if d.is_finite() {
                            let z = d / sigma;
                            *v += c as f64 * norm * (-0.5 * z * z).exp();
                        }
                    }
                }
                let total: f64 = values.iter().zip(&widths).map(|(v, w)| v * w).sum();
                let scale = idx.len() as f64 / total;
                for v in &mut values {
                    *v *= scale;
                }
                let at_points: Vec<f64> = p.locations().iter().map(|&l| values[lixel_of(l)]).collect();
                let infimum = values.iter().copied().fold(f64::INFINITY, f64::min);
                let out = Self {
                    kind: Kind::Lixel { metric, layout, values },
                    at_points,
                    infimum,
                    bandwidth: Some(sigma),
                };
                out.check_positive(&idx)?;
                Ok(out)
            }
        }
    }

    fn check_positive(&self, idx: &[usize]) -> Result<()> {
        if idx
            .iter()
            .all(|&i| self.at_points[i] > 0.0 && self.at_points[i].is_finite())
        {
            Ok(())
        } else {
            Err(Error::NonPositiveIntensity)
        }
    }

    /// Intensity at every point of the pattern, indexed like the pattern.
    pub fn at_points(&self) -> &[f64] {
        &self.at_points
    }

    pub fn at(&self, i: usize) -> f64 {
        self.at_points[i]
    }

    /// `inf lambda` over a dense grid and the data points.
    pub fn infimum(&self) -> f64 {
        self.infimum
    }

    pub fn bandwidth(&self) -> Option<f64> {
        self.bandwidth
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant(_))
    }

    /// Value at a planar location; `None` for supplied or network surfaces.
    pub fn eval_planar(&self, u: Point) -> Option<f64> {
        match &self.kind {
            Kind::Constant(v) => Some(*v),
            Kind::Planar { .. } => Some(eval_planar(&self.kind, u)),
            _ => None,
        }
    }

    /// Value at a network location; `None` for supplied or planar surfaces.
    pub fn eval_network(&self, loc: NetworkLocation) -> Option<f64> {
        match &self.kind {
            Kind::Constant(v) => Some(*v),
            Kind::Lixel { metric, layout, values } => Some(values[lixel_index(layout, metric.network(), loc)]),
            _ => None,
        }
    }

    /// Integral over the domain of `p` (quadrature on the plane, exact on lixels).
    pub fn integral(&self, p: &MarkedPattern) -> Option<f64> {
        match (&self.kind, p.support()) {
            (Kind::Constant(v), _) => Some(v * p.domain_measure()),
            (Kind::Planar { window, .. }, _) => {
                let (nodes, cell) = window.quadrature(NORMALIZATION_GRID);
                Some(nodes.iter().map(|&u| eval_planar(&self.kind, u)).sum::<f64>() * cell)
            }
            (Kind::Lixel { metric, layout, values }, Support::Network(_)) => {
                let net = metric.network();
                Some(
                    layout
                        .iter()
                        .enumerate()
                        .map(|(s, &(k, first))| {
                            let w = net.segment_length(s) / k as f64;
                            values[first..first + k].iter().sum::<f64>() * w
                        })
                        .sum(),
                )
            }
            _ => None,
        }
    }
}

fn scott(centres: &[Point], window: &Window) -> [f64; 2] {
    let n = centres.len() as f64;
    let factor = n.powf(-1.0 / 6.0);
    let (x0, x1, y0, y1) = window.bbox();
    let sides = [x1 - x0, y1 - y0];
    let mut out = [0.0; 2];
    for (c, o) in out.iter_mut().enumerate() {
        let mean = centres.iter().map(|p| p[c]).sum::<f64>() / n;
        let var = if centres.len() > 1 {
            centres.iter().map(|p| (p[c] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let sd = if var > 0.0 { var.sqrt() } else { sides[c] / 12f64.sqrt() };
        *o = sd * factor;
    }
    out
}

fn eval_planar(kind: &Kind, u: Point) -> f64 {
    let Kind::Planar {
        window,
        centres,
        sigma,
        scale,
    } = kind
    else {
        unreachable!()
    };
    let [sx, sy] = *sigma;
    let norm = 1.0 / (2.0 * PI * sx * sy);
    let raw: f64 = centres
        .iter()
        .map(|c| {
            let (zx, zy) = ((u[0] - c[0]) / sx, (u[1] - c[1]) / sy);
            norm * (-0.5 * (zx * zx + zy * zy)).exp()
        })
        .sum();
    let mass = window.gaussian_mass(u, sx, sy);
    if mass > 0.0 {
        scale * raw / mass
    } else {
        0.0
    }
}

fn lixel_index(layout: &[(usize, usize)], net: &crate::network::LinearNetwork, loc: NetworkLocation) -> usize {
    let (k, first) = layout[loc.segment];
    let w = net.segment_length(loc.segment) / k as f64;
    first + ((loc.offset / w) as usize).min(k - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LinearNetwork;

    fn planar(points: Vec<Point>) -> MarkedPattern {
        MarkedPattern::planar(Window::unit_square(), points).unwrap()
    }

    #[test]
    fn single_point_integrates_to_one() {
        let p = planar(vec![[0.3, 0.6]]);
        for h in [0.05, 0.2, 1.0] {
            let s = IntensitySurface::kernel_planar(&p, Target::All, Some(h)).unwrap();
            assert!((s.integral(&p).unwrap() - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn two_bumps() {
        let p = planar(vec![[0.2, 0.5], [0.8, 0.5]]);
        let s = IntensitySurface::kernel_planar(&p, Target::All, Some(0.08)).unwrap();
        let mid = s.eval_planar([0.5, 0.5]).unwrap();
        assert!(s.at(0) >= mid && s.at(1) >= mid);
        assert!((s.at(0) - s.at(1)).abs() < 1e-9 * s.at(0));
    }

    #[test]
    fn constant_network() {
        let net = Arc::new(LinearNetwork::new(vec![[0.0, 0.0], [5.0, 0.0]], vec![(0, 1)]).unwrap());
        let metric = Arc::new(NetworkMetric::new(net));
        let locs = (0..10).map(|i| NetworkLocation::new(0, 0.5 * i as f64)).collect();
        let p = MarkedPattern::on_network(metric, locs).unwrap();
        let s = IntensitySurface::network(&p, Target::All, NetworkIntensityMode::Constant, None, None).unwrap();
        assert_eq!(s.at(3), 2.0);
        let lix = IntensitySurface::network(&p, Target::All, NetworkIntensityMode::LixelKernel, None, None).unwrap();
        assert!((lix.integral(&p).unwrap() - 10.0).abs() < 0.1);
        assert!(matches!(
            IntensitySurface::network(&p, Target::All, NetworkIntensityMode::Supplied, None, None),
            Err(Error::MissingSuppliedValues)
        ));
    }
}
