//! Summary characteristics of marked patterns on linear networks, with geometric correction.
//!
//! Every pair `(u, x)` is weighted by `1 / m(u, d_L(u, x))`, the reciprocal of the number of
//! network locations at the pair distance from `u`.

use rayon::prelude::*;

use crate::curve::{check_grid, linspace, SummaryCurve};
use crate::error::{Error, Result};
use crate::estimate::{cumulative, product_distribution, resolve_bandwidth, smoothed, Origin, Pair};
use crate::intensity::IntensitySurface;
use crate::marks::{self, MarkWeightedK, PairMarkWeight};
use crate::network::NetworkLocation;
use crate::pattern::{MarkedPattern, Target};
use crate::planar::{assemble_j, check_lambda, combine_i, mask, tag, NearestNeighbour};
use crate::testfn::TestFunction;

fn check_tf(tf: TestFunction) -> Result<()> {
    if tf.available_on_networks() {
        Ok(())
    } else {
        Err(Error::UnsupportedTestFunction(tf.name()))
    }
}

/// `count` distances spanning `[0, 0.25 * diameter]`.
pub fn default_grid(p: &MarkedPattern, count: usize) -> Result<Vec<f64>> {
    Ok(linspace(0.0, 0.25 * p.metric()?.vertex_diameter(), count))
}

/// Dummy origins for the empty-space function: spacing `|L| / (5 n)`, at least 1000 locations.
pub fn default_dummy_locations(p: &MarkedPattern) -> Result<Vec<NetworkLocation>> {
    let net = p.network()?;
    let len = net.total_length();
    let spacing = (len / (5.0 * p.n().max(1) as f64)).min(len / 1000.0);
    net.dummy_grid(spacing)
}

fn k_core(
    p: &MarkedPattern,
    from: &[usize],
    to: &[bool],
    lambda: &[f64],
    r: &[f64],
    geometric: bool,
    mult: &(dyn Fn(&Pair) -> f64 + Sync),
) -> Result<(Vec<f64>, Vec<usize>)> {
    let table = p.network_pairs()?;
    let rmax = r[r.len() - 1];
    let items = from.iter().flat_map(|&u| {
        table.row(u).iter().filter(|q| to[q.to] && q.dist <= rmax).map(|q| {
            let w = if geometric { q.weight } else { 1.0 };
            (q.dist, w * mult(q) / lambda[q.to])
        })
    });
    let (sums, n_pairs) = cumulative(r, items);
    let n = from.len() as f64;
    Ok((sums.into_iter().map(|s| s / n).collect(), n_pairs))
}

fn cross_k_impl(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    r: &[f64],
    geometric: bool,
) -> Result<SummaryCurve> {
    check_grid(r)?;
    check_lambda(p, lambda_j)?;
    let from = p.indices(i)?;
    let to = mask(p, j)?;
    let (values, n_pairs) = k_core(p, &from, &to, lambda_j.at_points(), r, geometric, &|_| 1.0)?;
    Ok(SummaryCurve::new(
        format!("K_L_inhom[{},{}]", tag(i), tag(j)),
        r.to_vec(),
        values,
        r.to_vec(),
    )
    .with_pairs(n_pairs)
    .with_meta("correction", if geometric { "geometric" } else { "none" }))
}

/// Geometrically corrected cross-type K; `j = All` gives the dot-type version. Reference `r`.
pub fn cross_k(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    r: &[f64],
) -> Result<SummaryCurve> {
    cross_k_impl(p, i, j, lambda_j, r, true)
}

/// Dot-type K, `K_{i.}`, against the intensity of the whole pattern.
pub fn dot_k(p: &MarkedPattern, i: Target, lambda: &IntensitySurface, r: &[f64]) -> Result<SummaryCurve> {
    cross_k(p, i, Target::All, lambda, r)
}

/// The same sum with the geometric correction replaced by one; diagnostic only.
pub fn cross_k_uncorrected(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    r: &[f64],
) -> Result<SummaryCurve> {
    cross_k_impl(p, i, j, lambda_j, r, false)
}

/// Kernel pair correlation `(1 / n_i) sum k_h(r - d) w / lambda_j(x)`; masked where no pair is in range.
pub fn cross_pcf(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    r: &[f64],
    bandwidth: Option<f64>,
) -> Result<SummaryCurve> {
    check_grid(r)?;
    check_lambda(p, lambda_j)?;
    let h = resolve_bandwidth(p, bandwidth)?;
    let from = p.indices(i)?;
    let to = mask(p, j)?;
    let table = p.network_pairs()?;
    let lambda = lambda_j.at_points();
    let items = from.iter().flat_map(|&u| {
        table
            .row(u)
            .iter()
            .filter(|q| to[q.to])
            .map(|q| (q.dist, [q.weight / lambda[q.to]]))
    });
    let (sums, n_pairs) = smoothed(r, h, items);
    let n = from.len() as f64;
    let values = sums
        .iter()
        .zip(&n_pairs)
        .map(|([s], &c)| if c == 0 { f64::NAN } else { s / n })
        .collect();
    Ok(SummaryCurve::new(
        format!("pcf_L_inhom[{},{}]", tag(i), tag(j)),
        r.to_vec(),
        values,
        vec![1.0; r.len()],
    )
    .with_pairs(n_pairs)
    .with_meta("bandwidth", h))
}

/// Network nearest-neighbour distribution with factors `1 - lambda_bar w / lambda_j(x)`.
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
    let table = p.network_pairs()?;
    let lbar = lambda_j.infimum();
    let lambda = lambda_j.at_points();
    let rmax = r[r.len() - 1];
    let origins: Vec<Origin> = from
        .iter()
        .map(|&u| Origin {
            max_r: f64::INFINITY,
            neighbours: table
                .row(u)
                .iter()
                .filter(|q| to[q.to] && q.dist <= rmax)
                .map(|q| (q.dist, lbar * q.weight / lambda[q.to]))
                .collect(),
        })
        .collect();
    Ok(SummaryCurve::new(
        format!("H_L_inhom[{},{}]", tag(i), tag(j)),
        r.to_vec(),
        product_distribution(r, &origins),
        r.iter().map(|x| 1.0 - (-lbar * x).exp()).collect(),
    )
    .with_meta("lambda_bar", lbar))
}

/// Network empty-space function over dummy origins.
pub fn empty_space(
    p: &MarkedPattern,
    j: Target,
    lambda_j: &IntensitySurface,
    dummy: Option<&[NetworkLocation]>,
    r: &[f64],
) -> Result<SummaryCurve> {
    check_grid(r)?;
    check_lambda(p, lambda_j)?;
    let metric = p.metric()?;
    let to: Vec<usize> = p.indices(j)?;
    let default;
    let dummy = match dummy {
        Some(d) => d,
        None => {
            default = default_dummy_locations(p)?;
            &default
        }
    };
    for &u in dummy {
        metric.network().check_location(u)?;
    }
    let lbar = lambda_j.infimum();
    let lambda = lambda_j.at_points();
    let locs = p.locations();
    let rmax = r[r.len() - 1];
    let origins: Vec<Origin> = dummy
        .par_iter()
        .map(|&u| {
            let counter = metric.perimeter_counter(u);
            let neighbours = to
                .iter()
                .filter_map(|&x| {
                    let d = counter.distance_to(locs[x]);
                    (d <= rmax).then(|| (d, lbar * counter.nabla(d) / lambda[x]))
                })
                .collect();
            Origin {
                max_r: f64::INFINITY,
                neighbours,
            }
        })
        .collect();
    Ok(SummaryCurve::new(
        format!("F_L_inhom[{}]", tag(j)),
        r.to_vec(),
        product_distribution(r, &origins),
        r.iter().map(|x| 1.0 - (-lbar * x).exp()).collect(),
    )
    .with_meta("lambda_bar", lbar)
    .with_meta("n_dummy", dummy.len()))
}

/// `J^L = (1 - H^L) / (1 - F^L)`.
pub fn cross_j(
    p: &MarkedPattern,
    i: Target,
    j: Target,
    lambda_j: &IntensitySurface,
    dummy: Option<&[NetworkLocation]>,
    r: &[f64],
) -> Result<NearestNeighbour> {
    let h = cross_h(p, i, j, lambda_j, r)?;
    let f = empty_space(p, j, lambda_j, dummy, r)?;
    Ok(assemble_j(format!("J_L_inhom[{},{}]", tag(i), tag(j)), h, f))
}

/// Dot-type `H^L_{i.}` against the whole pattern.
pub fn dot_h(p: &MarkedPattern, i: Target, lambda: &IntensitySurface, r: &[f64]) -> Result<SummaryCurve> {
    cross_h(p, i, Target::All, lambda, r)
}

/// Dot-type `J^L_{i.}` against the whole pattern.
pub fn dot_j(
    p: &MarkedPattern,
    i: Target,
    lambda: &IntensitySurface,
    dummy: Option<&[NetworkLocation]>,
    r: &[f64],
) -> Result<NearestNeighbour> {
    cross_j(p, i, Target::All, lambda, dummy, r)
}

/// `I^L = sum_i p_i J^L_ii - J^L`.
pub fn i_function(
    p: &MarkedPattern,
    lambdas: &[IntensitySurface],
    lambda_full: &IntensitySurface,
    dummy: Option<&[NetworkLocation]>,
    r: &[f64],
) -> Result<SummaryCurve> {
    let counts = p.type_counts()?;
    if lambdas.len() != counts.len() {
        return Err(Error::IntensityLength {
            expected: counts.len(),
            got: lambdas.len(),
        });
    }
    let default;
    let dummy = match dummy {
        Some(d) => d,
        None => {
            default = default_dummy_locations(p)?;
            &default
        }
    };
    let n = p.n() as f64;
    let mut js = Vec::with_capacity(counts.len());
    for (t, lambda) in lambdas.iter().enumerate() {
        let t = Target::Type(t as u32 + 1);
        js.push(cross_j(p, t, t, lambda, Some(dummy), r)?.j);
    }
    let full = cross_j(p, Target::All, Target::All, lambda_full, Some(dummy), r)?.j;
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let mut out = combine_i(r, &weights, &js, &full);
    out.label = "I_L_inhom".into();
    Ok(out)
}

fn pairs_of(p: &MarkedPattern) -> Result<Vec<Pair>> {
    Ok(p.network_pairs()?.iter().copied().collect())
}

/// Network mark connection function `p^L_ij(r)`.
pub fn mark_connection(p: &MarkedPattern, i: u32, j: u32, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    let h = resolve_bandwidth(p, bandwidth)?;
    let mut c = marks::mark_connection(p, &pairs_of(p)?, i, j, r, h)?;
    c.label = format!("p_L[{i},{j}]");
    Ok(c)
}

/// Network mark equality function `sum_i p^L_ii(r)`.
pub fn mark_equality(p: &MarkedPattern, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    let h = resolve_bandwidth(p, bandwidth)?;
    let mut c = marks::mark_equality(p, &pairs_of(p)?, r, h)?;
    c.label = "p_L_eq".into();
    Ok(c)
}

/// Network mingling function.
pub fn mingling(p: &MarkedPattern, r: &[f64]) -> Result<SummaryCurve> {
    let mut c = marks::mingling(p, &pairs_of(p)?, r)?;
    c.label = "mingling_L".into();
    Ok(c)
}

/// Network `t_f`-correlation, pairs weighted by the geometric correction.
pub fn tf_correlation(p: &MarkedPattern, tf: TestFunction, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    check_tf(tf)?;
    let h = resolve_bandwidth(p, bandwidth)?;
    let mut c = marks::tf_correlation(p, &pairs_of(p)?, tf, r, h)?;
    c.label = format!("kappa_L[{}]", tf.name());
    Ok(c)
}

/// Mark-weighted network K. Without an intensity the homogeneous `n / |L|` is used.
pub fn mark_weighted_k(
    p: &MarkedPattern,
    tf: TestFunction,
    lambda: Option<&IntensitySurface>,
    r: &[f64],
    bandwidth: Option<f64>,
) -> Result<MarkWeightedK> {
    check_tf(tf)?;
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
    let (kw, np) = k_core(p, &from, &to, lambda.at_points(), r, true, &|q| {
        w.weight(q.from, q.to, q.dist)
    })?;
    let (k, _) = k_core(p, &from, &to, lambda.at_points(), r, true, &|_| 1.0)?;
    let weighted = SummaryCurve::new("", r.to_vec(), kw, r.to_vec())
        .with_pairs(np.clone())
        .with_meta("test_function", tf.name());
    let unweighted = SummaryCurve::new("K_L", r.to_vec(), k, r.to_vec()).with_pairs(np);
    let mut out = MarkWeightedK::assemble(tf, weighted, unweighted);
    out.weighted.label = format!("K_L[{}]", tf.name());
    out.ratio.label = format!("K_L[{}]/K_L", tf.name());
    Ok(out)
}

/// `(lambda^L)^2 rho^L(r) kappa^L(r)` with `lambda^L = n / |L|`.
pub fn u_statistic(p: &MarkedPattern, tf: TestFunction, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    check_tf(tf)?;
    let lambda = IntensitySurface::homogeneous(p, Target::All)?;
    let pcf = cross_pcf(p, Target::All, Target::All, &lambda, r, bandwidth)?;
    let kappa = tf_correlation(p, tf, r, bandwidth)?;
    let mut out = marks::u_statistic(lambda.at(0), &pcf, &kappa, tf);
    out.label = format!("U_L[{}]", tf.name());
    Ok(out)
}

/// Network bivariate mark correlation `E[m1(x) m2(y) | d_L = r] / (mu_1 mu_2)`.
pub fn bivariate_mark_correlation(p: &MarkedPattern, r: &[f64], bandwidth: Option<f64>) -> Result<SummaryCurve> {
    let h = resolve_bandwidth(p, bandwidth)?;
    let mut c = marks::bivariate(p, &pairs_of(p)?, r, h)?;
    c.label = "kappa_L[m1,m2]".into();
    Ok(c)
}
