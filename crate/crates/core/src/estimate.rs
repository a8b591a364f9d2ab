//! Shared accumulation machinery for the planar and network estimators.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pattern::{MarkedPattern, Support};

/// An ordered pair of distinct points at finite distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub from: usize,
    pub to: usize,
    pub dist: f64,
    /// geometric correction: `1` on the plane, `1 / m(from, dist)` on a network
    pub weight: f64,
}

/// Shortest-path distances and geometric corrections for all ordered pairs of a network pattern.
#[derive(Debug, Clone)]
pub struct PairTable {
    rows: Vec<Vec<Pair>>,
}

impl PairTable {
    pub(crate) fn network(p: &MarkedPattern) -> Self {
        let Support::Network(metric) = p.support() else {
            unreachable!("pair tables are built for network patterns only");
        };
        let locs = p.locations();
        let rows = (0..locs.len())
            .into_par_iter()
            .map(|i| {
                let counter = metric.perimeter_counter(locs[i]);
                (0..locs.len())
                    .filter(|&j| j != i)
                    .filter_map(|j| {
                        let dist = metric.distance(locs[i], locs[j]);
                        dist.is_finite().then(|| Pair {
                            from: i,
                            to: j,
                            dist,
                            weight: counter.nabla(dist),
                        })
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// Pairs with first point `i`, in increasing order of the second index.
    pub fn row(&self, i: usize) -> &[Pair] {
        &self.rows[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pair> {
        self.rows.iter().flatten()
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }
}

/// All ordered pairs of distinct points of `p` at finite distance.
pub fn all_pairs(p: &MarkedPattern) -> Result<Vec<Pair>> {
    match p.support() {
        Support::Planar(_) => {
            let c = p.coords();
            let mut out = Vec::with_capacity(c.len() * c.len().saturating_sub(1));
            for i in 0..c.len() {
                for j in 0..c.len() {
                    if i != j {
                        out.push(Pair {
                            from: i,
                            to: j,
                            dist: crate::network::euclidean(c[i], c[j]),
                            weight: 1.0,
                        });
                    }
                }
            }
            Ok(out)
        }
        Support::Network(_) => Ok(p.network_pairs()?.iter().copied().collect()),
    }
}

/// Epanechnikov kernel with half-width `h`.
pub fn epanechnikov(x: f64, h: f64) -> f64 {
    let u = x / h;
    if u.abs() < 1.0 {
        0.75 * (1.0 - u * u) / h
    } else {
        0.0
    }
}

/// Default kernel half-width: `0.15 / sqrt(lambda)` on the plane, `0.15 / lambda` on a network.
pub fn default_bandwidth(p: &MarkedPattern) -> f64 {
    let n = p.n().max(1) as f64;
    let lambda = n / p.domain_measure();
    match p.support() {
        Support::Planar(_) => 0.15 / lambda.sqrt(),
        Support::Network(_) => 0.15 / lambda,
    }
}

pub(crate) fn resolve_bandwidth(p: &MarkedPattern, bandwidth: Option<f64>) -> Result<f64> {
    match bandwidth {
        None => Ok(default_bandwidth(p)),
        Some(h) if h > 0.0 && h.is_finite() => Ok(h),
        Some(h) => Err(Error::NonPositiveBandwidth(h)),
    }
}

/// `sum of value over items with dist <= r`, and the matching counts, for every `r` in the grid.
pub(crate) fn cumulative(r: &[f64], items: impl IntoIterator<Item = (f64, f64)>) -> (Vec<f64>, Vec<usize>) {
    let mut sums = vec![0.0; r.len() + 1];
    let mut counts = vec![0usize; r.len() + 1];
    for (d, v) in items {
        let k = r.partition_point(|&x| x < d);
        sums[k] += v;
        counts[k] += 1;
    }
    let mut acc = 0.0;
    let mut cnt = 0;
    let mut out = Vec::with_capacity(r.len());
    let mut out_n = Vec::with_capacity(r.len());
    for k in 0..r.len() {
        acc += sums[k];
        cnt += counts[k];
        out.push(acc);
        out_n.push(cnt);
    }
    (out, out_n)
}

/// Kernel-smoothed sums `sum k_h(r - dist) value`, one accumulator per entry of `value`,
/// and the number of items inside the kernel window at each `r`.
pub(crate) fn smoothed<const N: usize>(
    r: &[f64],
    h: f64,
    items: impl IntoIterator<Item = (f64, [f64; N])>,
) -> (Vec<[f64; N]>, Vec<usize>) {
    let mut sums = vec![[0.0; N]; r.len()];
    let mut counts = vec![0usize; r.len()];
    for (d, v) in items {
        let lo = r.partition_point(|&x| x <= d - h);
        for k in lo..r.len() {
            if r[k] >= d + h {
                break;
            }
            let w = epanechnikov(r[k] - d, h);
            if w > 0.0 {
                for (s, x) in sums[k].iter_mut().zip(v) {
                    *s += w * x;
                }
                counts[k] += 1;
            }
        }
    }
    (sums, counts)
}

/// One origin of a product-form nearest-neighbour estimator.
pub(crate) struct Origin {
    /// largest `r` at which the origin is usable (border correction); `INFINITY` if unrestricted
    pub max_r: f64,
    /// `(distance, factor)` for every candidate neighbour; the survival multiplies `1 - factor`
    pub neighbours: Vec<(f64, f64)>,
}

/// `1 - mean over usable origins of prod_{d <= r} (1 - factor)`; `NaN` where no origin is usable.
pub(crate) fn product_distribution(r: &[f64], origins: &[Origin]) -> Vec<f64> {
    let per_origin: Vec<Vec<f64>> = origins
        .par_iter()
        .map(|o| {
            let mut nb = o.neighbours.clone();
            nb.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut out = Vec::with_capacity(r.len());
            let mut surv = 1.0;
            let mut idx = 0;
            for &rk in r {
                while idx < nb.len() && nb[idx].0 <= rk {
                    surv *= 1.0 - nb[idx].1.clamp(0.0, 1.0);
                    idx += 1;
                }
                out.push(surv);
            }
            out
        })
        .collect();
    (0..r.len())
        .map(|k| {
            let (mut s, mut c) = (0.0, 0usize);
            for (o, surv) in origins.iter().zip(&per_origin) {
                if r[k] <= o.max_r {
                    s += surv[k];
                    c += 1;
                }
            }
            if c == 0 {
                f64::NAN
            } else {
                1.0 - s / c as f64
            }
        })
        .collect()
}

/// `(1 - H) / (1 - F)`, masked where `1 - F < 1e-6`.
pub(crate) fn j_ratio(h: &[f64], f: &[f64]) -> Vec<f64> {
    h.iter()
        .zip(f)
        .map(|(&h, &f)| {
            let denom = 1.0 - f;
            if !h.is_finite() || !(denom >= 1e-6) {
                f64::NAN
            } else {
                (1.0 - h) / denom
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_counts_inclusive() {
        let r = [0.0, 1.0, 2.0];
        let (s, n) = cumulative(&r, [(0.5, 1.0), (1.0, 2.0), (3.0, 4.0)]);
        assert_eq!(s, vec![0.0, 3.0, 3.0]);
        assert_eq!(n, vec![0, 2, 2]);
    }

    #[test]
    fn kernel_integrates_to_one() {
        let h = 0.3;
        let steps = 10_000;
        let dx = 2.0 * h / steps as f64;
        let total: f64 = (0..steps)
            .map(|i| epanechnikov(-h + (i as f64 + 0.5) * dx, h) * dx)
            .sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn smoothed_window() {
        let r = [0.0, 0.5, 1.0, 1.5];
        let (s, n) = smoothed(&r, 0.6, [(1.0, [2.0])]);
        assert_eq!(n, vec![0, 1, 1, 1]);
        assert!((s[2][0] - 2.0 * 0.75 / 0.6).abs() < 1e-12);
    }

    #[test]
    fn product_form() {
        let origins = vec![
            Origin {
                max_r: f64::INFINITY,
                neighbours: vec![(0.5, 1.0)],
            },
            Origin {
                max_r: 0.2,
                neighbours: vec![(0.1, 0.5)],
            },
        ];
        let h = product_distribution(&[0.0, 0.1, 0.5], &origins);
        assert_eq!(h, vec![0.0, 0.25, 1.0]);
        let j = j_ratio(&h, &[0.0, 0.5, 1.0]);
        assert_eq!(j[0], 1.0);
        assert_eq!(j[1], 1.5);
        assert!(j[2].is_nan());
    }
}
