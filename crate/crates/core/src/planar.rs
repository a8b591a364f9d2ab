//! Summary characteristics of marked patterns in planar windows.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::curve::{check_grid, SummaryCurve};
use crate::error::{Error, Result};
use crate::estimate::{
    self, all_pairs, cumulative, j_ratio, product_distribution, resolve_bandwidth, smoothed, Origin,
};
use crate::intensity::IntensitySurface;
use crate::marks::{self, MarkWeightedK, PairMarkWeight};
use crate::network::{euclidean, Point};
use crate::pattern::{MarkedPattern, Target};
use crate::testfn::TestFunction;
use crate::window::Window;

/// Edge corrections for planar K-type estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    None,
    Border,
    Translation,
    /// rectangular windows only
    Isotropic,
}

impl Correction {
    pub fn name(self) -> &'static str {
        match self {
            Correction::None => "none",
            Correction::Border => "border",
            Correction::Translation => "translation",
            Correction::Isotropic => "isotropic",
        }
    }

    /// Translation where the window allows it, otherwise border.
    pub fn default_for(window: &Window) -> Self {
        if window.translation_weight([0.0, 0.0]).is_ok() {
            Correction::Translation
        } else {
            Correction::Border
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Correction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Correction::None),
            "border" => Ok(Correction::Border),
            "translation" | "trans" => Ok(Correction::Translation),
            "isotropic" | "iso" | "ripley" => Ok(Correction::Isotropic),
            _ => Err(Error::Config(format!("unknown edge correction '{s}'"))),
        }
    }
}

/// Nearest-neighbour distribution, empty-space function and their J ratio.
#[derive(Debug, Clone)]
pub struct NearestNeighbour {
    pub h: SummaryCurve,
    pub f: SummaryCurve,
    pub j: SummaryCurve,
}

pub(crate) fn tag(t: Target) -> String {
    match t {
        Target::Type(k) => k.to_string(),
        Target::All => ".".to_string(),
    }
}

pub(crate) fn check_lambda(p: &MarkedPattern, lambda: &IntensitySurface) -> Result<()> {
    if lambda.at_points().len() != p.n() {
        return Err(Error::IntensityLength {
            expected: p.n(),
            got: lambda.at_points().len(),
        });
    }
    Ok(())
}

pub(crate) fn mask(p: &MarkedPattern, target: Target) -> Result<Vec<bool>> {
    let mut m = vec![false; p.n()];
    for i in p.indices(target)? {
        m[i] = true;
    }
    Ok(m)
}

fn edge_weight(window: &Window, correction: Correction, u: Point, x: Point, d: f64) -> Result<f64> {
    match correction {
        Correction::None | Correction::Border => Ok(1.0),
        Correction::Translation => window.translation_weight([x[0] - u[0], x[1] - u[1]]),
        Correction::Isotropic => window.isotropic_weight(u, d),
    }
}

/// Shared K sum: `(1/n_from) sum_u sum_x 1{d <= r} e(u, x) mult(u, x, d) / lambda(x)`.
fn k_core(
    p: &MarkedPattern,
    from: &[usize],
    to: &[bool],
    lambda: &[f64],
    r: &[f64],
    correction: Correction,
    mult: &(dyn Fn(usize, usize, f64) -> f64 + Sync),
) -> Result<(Vec<f64>, Vec<usize>)> {
    let window = p.window()?;
    let c = p.coords();
    let per_origin: Vec<Vec<(f64, f64)>> = from
        .par_iter()
        .map(|&u| {
            let mut out = Vec::new();
            for x in 0..c.len() {
                if x == u || !to[x] {
                    continue;
                }
                let d = euclidean(c[u], c[x]);
                if d > r[r.len() - 1] {
                    continue;
                }
                let e = edge_weight(window, correction, c[u], c[x], d)?;
                out.push((d, e * mult(u, x, d) / lambda[x]));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    if correction == Correction::Border {
        let g = r.len();
        let mut num = vec![0.0; g + 1];
        let mut cnt = vec![0i64; g + 1];
        let mut origins = vec![0i64; g + 1];
        for (&u, items) in from.iter().zip(&per_origin) {
            let b = window.boundary_distance(c[u]);
            // usable for r <= b
            let stop = r.partition_point(|&x| x <= b);
            origins[0] += 1;
            origins[stop] -= 1;
            for &(d, v) in items {
                let start = r.partition_point(|&x| x < d);
                if start < stop {
                    num[start] += v;
                    num[stop] -= v;
                    cnt[start] += 1;
                    cnt[stop] -= 1;
                }
            }
        }
        let (mut acc, mut nacc, mut oacc) = (0.0, 0i64, 0i64);
        let mut values = Vec::with_capacity(g);
        let mut n_pairs = Vec::with_capacity(g);
        for k in 0..g {
            acc += num[k];
            nacc += cnt[k];
            oacc += origins[k];
            values.push(if oacc > 0 { acc / oacc as f64 } else { f64::NAN });
            n_pairs.push(nacc as usize);
        }
        return Ok((values, n_pairs));
    }
    let (sums, n_pairs) = cumulative(r, per_origin.into_iter().flatten());
    let n = from.len() as f64;
    Ok((sums.into_iter().map(|s| s / n).collect(), n_pairs))
}

/// Inhomogeneous cross-type (or dot-type with `j = All`) K function; reference `pi r^2`.
pub fn cross_k(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    r: &[f64],
    correction: Correction,
) -> Result<SummaryCurve> {
    check_grid(r)?;
    check_lambda(p, lambda_j)?;
    let from = p.indices(i)?;
    let to = mask(p, j)?;
    let (values, n_pairs) = k_core(p, &from, &to, lambda_j.at_points(), r, correction, &|_, _, _| 1.0)?;
    Ok(SummaryCurve::new(
        format!("K_inhom[{},{}]", tag(i), tag(j)),
        r.to_vec(),
        values,
        r.iter().map(|x| PI * x * x).collect(),
    )
    .with_pairs(n_pairs)
    .with_meta("correction", correction))
}

/// `sqrt(K / pi)`.
pub fn cross_l(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    r: &[f64],
    correction: Correction,
) -> Result<SummaryCurve> {
    Ok(cross_k(p, i, j, lambda_j, r, correction)?.l_transform())
}

/// Kernel pair correlation `(1 / (2 pi r n_i)) sum k_h(r - d) e(u, x) / lambda_j(x)`; reference 1.
pub fn cross_pcf(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    r: &[f64],
    bandwidth: Option<f64>,
    correction: Correction,
) -> Result<SummaryCurve> {
    check_grid(r)?;
    check_lambda(p, lambda_j)?;
    if correction == Correction::Border {
        return Err(Error::UnsupportedCorrection("border"));
    }
    let h = resolve_bandwidth(p, bandwidth)?;
    let window = p.window()?;
    let from = p.indices(i)?;
    let to = mask(p, j)?;
    let c = p.coords();
    let lambda = lambda_j.at_points();
    let rmax = r[r.len() - 1] + h;
    let items: Vec<Vec<(f64, [f64; 1])>> = from
        .par_iter()
        .map(|&u| {
            let mut out = Vec::new();
            for x in 0..c.len() {
                if x == u || !to[x] {
                    continue;
                }
                let d = euclidean(c[u], c[x]);
                if d >= rmax {
                    continue;
                }
                let e = edge_weight(window, correction, c[u], c[x], d)?;
                out.push((d, [e / lambda[x]]));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let (sums, n_pairs) = smoothed(r, h, items.into_iter().flatten());
    let n = from.len() as f64;
    let values = sums
        .iter()
        .zip(r)
        .map(|([s], &rk)| {
            if *s == 0.0 {
                0.0
            } else if rk > 0.0 {
                s / (2.0 * PI * rk * n)
            } else {
                f64::NAN
            }
        })
        .collect();
    Ok(SummaryCurve::new(
        format!("pcf_inhom[{},{}]", tag(i), tag(j)),
        r.to_vec(),
        values,
        vec![1.0; r.len()],
    )
    .with_pairs(n_pairs)
    .with_meta("bandwidth", h)
    .with_meta("correction", correction))
}

fn h_origins(
    p: &MarkedPattern,
    origins: &[Point],
    exclude: Option<&[usize]>,
    to: &[bool],
    lambda_j: &IntensitySurface,
    rmax: f64,
) -> Result<Vec<Origin>> {
    let window = p.window()?;
    let c = p.coords();
    let lbar = lambda_j.infimum();
    let lambda = lambda_j.at_points();
    Ok(origins
        .par_iter()
        .enumerate()
        .map(|(k, &u)| {
            let own = exclude.map(|e| e[k]);
            let neighbours = (0..c.len())
                .filter(|&x| to[x] && Some(x) != own)
                .filter_map(|x| {
                    let d = euclidean(u, c[x]);
                    (d <= rmax).then(|| (d, lbar / lambda[x]))
                })
                .collect();
            Origin {
                max_r: window.boundary_distance(u),
                neighbours,
            }
        })
        .collect())
}

/// Inhomogeneous nearest-neighbour distance distribution from type `i` to `j` (border corrected).
pub fn cross_h(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    r: &[f64],
) -> Result<SummaryCurve> {
    check_grid(r)?;
    check_lambda(p, lambda_j)?;
    let from = p.indices(i)?;
    let to = mask(p, j)?;
    let points: Vec<Point> = from.iter().map(|&u| p.coords()[u]).collect();
    let origins = h_origins(p, &points, Some(&from), &to, lambda_j, r[r.len() - 1])?;
    let lbar = lambda_j.infimum();
    Ok(SummaryCurve::new(
        format!("H_inhom[{},{}]", tag(i), tag(j)),
        r.to_vec(),
        product_distribution(r, &origins),
        r.iter().map(|x| 1.0 - (-lbar * PI * x * x).exp()).collect(),
    )
    .with_meta("lambda_bar", lbar))
}

/// Regular grid of dummy origins inside the window.
pub fn default_dummy_points(window: &Window) -> Vec<Point> {
    window.quadrature(50).0
}

/// Inhomogeneous empty-space function of type `j` over dummy origins (border corrected).
pub fn empty_space(
    p: &MarkedPattern,
    j: Target,
    lambda_j: &IntensitySurface,
    dummy: Option<&[Point]>,
    r: &[f64],
) -> Result<SummaryCurve> {
    check_grid(r)?;
    check_lambda(p, lambda_j)?;
    let to = mask(p, j)?;
    let default;
    let dummy = match dummy {
        Some(d) => d,
        None => {
            default = default_dummy_points(p.window()?);
            &default
        }
    };
    let origins = h_origins(p, dummy, None, &to, lambda_j, r[r.len() - 1])?;
    let lbar = lambda_j.infimum();
    Ok(SummaryCurve::new(
        format!("F_inhom[{}]", tag(j)),
        r.to_vec(),
        product_distribution(r, &origins),
        r.iter().map(|x| 1.0 - (-lbar * PI * x * x).exp()).collect(),
    )
    .with_meta("lambda_bar", lbar))
}

pub(crate) fn assemble_j(label: String, h: SummaryCurve, f: SummaryCurve) -> NearestNeighbour {
    let j = SummaryCurve::new(label, h.r.clone(), j_ratio(&h.values, &f.values), vec![1.0; h.len()]);
    NearestNeighbour { h, f, j }
}

/// `J = (1 - H) / (1 - F)`, masked where `1 - F < 1e-6`.
pub fn cross_j(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    dummy: Option<&[Point]>,
    r: &[f64],
) -> Result<NearestNeighbour> {
    let h = cross_h(p, i, j, lambda_j, r)?;
    let f = empty_space(p, j, lambda_j, dummy, r)?;
    Ok(assemble_j(format!("J_inhom[{},{}]", tag(i), tag(j)), h, f))
}

pub(crate) fn combine_i(r: &[f64], weights: &[f64], js: &[SummaryCurve], full: &SummaryCurve) -> SummaryCurve {
    let values = (0..r.len())
        .map(|k| {
            let s: f64 = weights.iter().zip(js).map(|(w, j)| w * j.values[k]).sum();
            s - full.values[k]
        })
        .collect();
    SummaryCurve::new("I_inhom", r.to_vec(), values, vec![0.0; r.len()])
}

/// `I = sum_i p_i J_ii - J`, with one intensity per type and one for the whole pattern.
pub fn i_function(
    p: &MarkedPattern,
    lambdas: &[IntensitySurface],
    lambda_full: &IntensitySurface,
    dummy: Option<&[Point]>,
    r: &[f64],
) -> Result<SummaryCurve> {
    let counts = p.type_counts()?;
    if lambdas.len() != counts.len() {
        return Err(Error::IntensityLength {
            expected: counts.len(),
            got: lambdas.len(),
        });
    }
    let n = p.n() as f64;
    let mut js = Vec::with_capacity(counts.len());
    for (t, lambda) in lambdas.iter().enumerate() {
        let t = Target::Type(t as u32 + 1);
        js.push(cross_j(p, t, t, lambda, dummy, r)?.j);
    }
    let full = cross_j(p, Target::All, Target::All, lambda_full, dummy, r)?.j;
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(combine_i(r, &weights, &js, &full))
}

/// Mark connection function `p_ij(r)`; reference `p_i p_j`.
pub fn mark_connection(p: &MarkedPattern, i: u32, j: u32, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    p.window()?;
    let h = resolve_bandwidth(p, bandwidth)?;
    marks::mark_connection(p, &all_pairs(p)?, i, j, r, h)
}

/// Mark equality function `sum_i p_ii(r)`.
pub fn mark_equality(p: &MarkedPattern, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    p.window()?;
    let h = resolve_bandwidth(p, bandwidth)?;
    marks::mark_equality(p, &all_pairs(p)?, r, h)
}

/// Normalized mingling function; reference 1.
pub fn mingling(p: &MarkedPattern, r: &[f64]) -> Result<SummaryCurve> {
    p.window()?;
    marks::mingling(p, &all_pairs(p)?, r)
}

/// `t_f`-correlation function `kappa_{t_f}(r)`.
pub fn tf_correlation(p: &MarkedPattern, tf: TestFunction, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    p.window()?;
    let h = resolve_bandwidth(p, bandwidth)?;
    marks::tf_correlation(p, &all_pairs(p)?, tf, r, h)
}

/// Mark-weighted K with pair weights `t_f / c_{t_f}`, its unweighted counterpart and the ratio.
/// Without an intensity the homogeneous `n / |W|` is used.
pub fn mark_weighted_k(
    p: &MarkedPattern,
    tf: TestFunction,
    lambda: Option<&IntensitySurface>,
    r: &[f64],
    correction: Correction,
    bandwidth: Option<f64>,
) -> Result<MarkWeightedK> {
    check_grid(r)?;
    let homogeneous;
    let lambda = match lambda {
        Some(l) => l,
        None => {
            homogeneous = IntensitySurface::homogeneous(p, Target::All)?;
            &homogeneous
        }
    };
    check_lambda(p, lambda)?;
    let h = resolve_bandwidth(p, bandwidth)?;
    let w = PairMarkWeight::new(p, tf, h)?;
    let from: Vec<usize> = (0..p.n()).collect();
    let to = vec![true; p.n()];
    let theo: Vec<f64> = r.iter().map(|x| PI * x * x).collect();
    let (kw, np) = k_core(p, &from, &to, lambda.at_points(), r, correction, &|u, x, d| {
        w.weight(u, x, d)
    })?;
    let (k, _) = k_core(p, &from, &to, lambda.at_points(), r, correction, &|_, _, _| 1.0)?;
    let weighted = SummaryCurve::new("", r.to_vec(), kw, theo.clone())
        .with_pairs(np.clone())
        .with_meta("correction", correction)
        .with_meta("test_function", tf.name());
    let unweighted = SummaryCurve::new("K", r.to_vec(), k, theo)
        .with_pairs(np)
        .with_meta("correction", correction);
    Ok(MarkWeightedK::assemble(tf, weighted, unweighted))
}

/// `lambda^2 rho(r) kappa_{t_f}(r)` with homogeneous `lambda = n / |W|`.
pub fn u_statistic(p: &MarkedPattern, tf: TestFunction, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    let window = p.window()?;
    let lambda = IntensitySurface::homogeneous(p, Target::All)?;
    let correction = match Correction::default_for(window) {
        Correction::Border => Correction::None,
        c => c,
    };
    let pcf = cross_pcf(p, Target::All, Target::All, &lambda, r, bandwidth, correction)?;
    let kappa = tf_correlation(p, tf, r, bandwidth)?;
    Ok(marks::u_statistic(lambda.at(0), &pcf, &kappa, tf))
}

/// Kernel estimate of `E[m1(x) m2(y) | d = r] / (mu_1 mu_2)`.
pub fn bivariate_mark_correlation(p: &MarkedPattern, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    p.window()?;
    let h = resolve_bandwidth(p, bandwidth)?;
    marks::bivariate(p, &all_pairs(p)?, r, h)
}

/// Default bandwidth of the kernel estimators for this pattern.
pub fn default_bandwidth(p: &MarkedPattern) -> f64 {
    estimate::default_bandwidth(p)
}

/// `count` distances spanning `[0, 0.25 * shorter side of the bounding box]`.
pub fn default_grid(window: &Window, count: usize) -> Vec<f64> {
    let (x0, x1, y0, y1) = window.bbox();
    crate::curve::linspace(0.0, 0.25 * (x1 - x0).min(y1 - y0), count)
}
