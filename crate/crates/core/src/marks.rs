//! Mark statistics expressed over pair lists, shared by both domains.
//!
//! Every pair carries a geometric weight (`1` on the plane, `1 / m(u, r)` on a network).

use crate::curve::{check_grid, SummaryCurve};
use crate::error::{Error, Result};
use crate::estimate::{cumulative, smoothed, Pair};
use crate::pattern::{MarkMoments, MarkedPattern};
use crate::testfn::{Moments, TestFunction};

/// `p_i p_j rho_ij / rho` from kernel-weighted pair sums.
pub(crate) fn mark_connection(
    p: &MarkedPattern,
    pairs: &[Pair],
    i: u32,
    j: u32,
    r: &[f64],
    h: f64,
) -> Result<SummaryCurve> {
    check_grid(r)?;
    let types = p.require_types()?;
    let counts = p.type_counts()?;
    for t in [i, j] {
        if t == 0 || t as usize > counts.len() {
            return Err(Error::EmptyComponent(t));
        }
    }
    let n = p.n() as f64;
    let (ni, nj) = (counts[i as usize - 1] as f64, counts[j as usize - 1] as f64);
    let norm_ij = if i == j { ni * (ni - 1.0) } else { ni * nj };
    let (sums, n_pairs) = smoothed(
        r,
        h,
        pairs.iter().map(|q| {
            let hit = types[q.from] == i && types[q.to] == j;
            (q.dist, [if hit { q.weight } else { 0.0 }, q.weight])
        }),
    );
    let pij = (ni / n) * (nj / n);
    let values = sums
        .iter()
        .map(|[s_ij, s]| {
            if *s <= 0.0 || norm_ij <= 0.0 {
                f64::NAN
            } else {
                pij * (s_ij / norm_ij) / (s / (n * (n - 1.0)))
            }
        })
        .collect();
    Ok(
        SummaryCurve::new(format!("p[{i},{j}]"), r.to_vec(), values, vec![pij; r.len()])
            .with_pairs(n_pairs)
            .with_meta("bandwidth", h)
            .with_meta("assumption", "homogeneous"),
    )
}

/// `sum_i p_ii(r)`.
pub(crate) fn mark_equality(p: &MarkedPattern, pairs: &[Pair], r: &[f64], h: f64) -> Result<SummaryCurve> {
    let k = p.n_types();
    if k == 0 {
        return Err(Error::NoTypes);
    }
    let mut values = vec![0.0; r.len()];
    let mut theo = vec![0.0; r.len()];
    let mut n_pairs = None;
    for t in 1..=k {
        let c = mark_connection(p, pairs, t, t, r, h)?;
        for (v, x) in values.iter_mut().zip(&c.values) {
            *v += x;
        }
        for (v, x) in theo.iter_mut().zip(&c.theo) {
            *v += x;
        }
        n_pairs = c.n_pairs;
    }
    let mut out = SummaryCurve::new("p_eq", r.to_vec(), values, theo).with_meta("bandwidth", h);
    out.n_pairs = n_pairs;
    Ok(out)
}

/// Share of unlike ordered pairs among all ordered pairs within `r`, divided by the mingling constant.
pub(crate) fn mingling(p: &MarkedPattern, pairs: &[Pair], r: &[f64]) -> Result<SummaryCurve> {
    check_grid(r)?;
    let types = p.require_types()?;
    let c = p.mingling_constant()?;
    if c <= 0.0 {
        return Err(Error::SingleType);
    }
    let (mixed, n_pairs) = cumulative(
        r,
        pairs
            .iter()
            .map(|q| (q.dist, if types[q.from] != types[q.to] { 1.0 } else { 0.0 })),
    );
    let values = mixed
        .iter()
        .zip(&n_pairs)
        .map(|(&m, &n)| if n == 0 { f64::NAN } else { m / n as f64 / c })
        .collect();
    Ok(SummaryCurve::new("mingling", r.to_vec(), values, vec![1.0; r.len()])
        .with_pairs(n_pairs)
        .with_meta("constant", c))
}

/// Normalized Nadaraya-Watson estimate of `E[t_f(m(x), m(y)) | d(x, y) = r]`.
pub(crate) fn tf_correlation(
    p: &MarkedPattern,
    pairs: &[Pair],
    tf: TestFunction,
    r: &[f64],
    h: f64,
) -> Result<SummaryCurve> {
    check_grid(r)?;
    let marks = p.require_marks()?;
    let c = tf.normalizer(marks)?;
    let mean = Moments::of(marks).mean;
    let values: Vec<f64>;
    let n_pairs;
    if tf == TestFunction::SchlatherI {
        // t = m_x m_y - mu(r) (m_x + m_y) + mu(r)^2, mu(r) the kernel mean of m_x
        let (sums, np) = smoothed(
            r,
            h,
            pairs.iter().map(|q| {
                let (a, b) = (marks[q.from], marks[q.to]);
                (q.dist, [q.weight, q.weight * a * b, q.weight * (a + b), q.weight * a])
            }),
        );
        n_pairs = np;
        values = sums
            .iter()
            .map(|[w, ab, apb, a]| {
                if *w <= 0.0 {
                    return f64::NAN;
                }
                let mu = a / w;
                (ab / w - mu * apb / w + mu * mu) / c
            })
            .collect();
    } else {
        let (sums, np) = smoothed(
            r,
            h,
            pairs.iter().map(|q| {
                let t = tf.eval(marks[q.from], marks[q.to], mean, mean);
                (q.dist, [q.weight, q.weight * t])
            }),
        );
        n_pairs = np;
        values = sums
            .iter()
            .map(|[w, wt]| if *w <= 0.0 { f64::NAN } else { wt / w / c })
            .collect();
    }
    Ok(SummaryCurve::new(
        format!("kappa[{}]", tf.name()),
        r.to_vec(),
        values,
        vec![tf.null_value(); r.len()],
    )
    .with_pairs(n_pairs)
    .with_meta("bandwidth", h)
    .with_meta("test_function", tf.name()))
}

/// Kernel estimate of `E[m1(x) m2(y) | d = r] / (mu_1 mu_2)`.
pub(crate) fn bivariate(p: &MarkedPattern, pairs: &[Pair], r: &[f64], h: f64) -> Result<SummaryCurve> {
    check_grid(r)?;
    let m1 = p.require_marks()?;
    let m2 = p.second_marks().ok_or(Error::NoSecondMarks)?;
    let (a, b) = (Moments::of(m1), Moments::of(m2));
    let norm = a.mean * b.mean;
    if norm.abs() <= 1e-12 * (a.scale * b.scale).max(f64::MIN_POSITIVE) {
        return Err(Error::ZeroNormalizer("bivariate"));
    }
    let (sums, n_pairs) = smoothed(
        r,
        h,
        pairs
            .iter()
            .map(|q| (q.dist, [q.weight, q.weight * m1[q.from] * m2[q.to]])),
    );
    let values = sums
        .iter()
        .map(|[w, wt]| if *w <= 0.0 { f64::NAN } else { wt / w / norm })
        .collect();
    Ok(
        SummaryCurve::new("kappa[m1,m2]", r.to_vec(), values, vec![1.0; r.len()])
            .with_pairs(n_pairs)
            .with_meta("bandwidth", h),
    )
}

/// Per-pair weight `t_f(m(u), m(x)) / c_{t_f}` for mark-weighted K functions.
pub(crate) struct PairMarkWeight {
    tf: TestFunction,
    marks: Vec<f64>,
    mean: f64,
    c: f64,
    local: Option<MarkMoments>,
}

impl PairMarkWeight {
    pub(crate) fn new(p: &MarkedPattern, tf: TestFunction, h: f64) -> Result<Self> {
        let marks = p.require_marks()?.to_vec();
        let c = tf.normalizer(&marks)?;
        let m = Moments::of(&marks);
        let local = if tf == TestFunction::SchlatherI {
            Some(p.mark_moments(Some(h))?)
        } else {
            None
        };
        Ok(Self {
            tf,
            marks,
            mean: m.mean,
            c,
            local,
        })
    }

    pub(crate) fn weight(&self, from: usize, to: usize, dist: f64) -> f64 {
        let local = self
            .local
            .as_ref()
            .and_then(|l| l.conditional_mean_at(dist))
            .unwrap_or(self.mean);
        self.tf.eval(self.marks[from], self.marks[to], self.mean, local) / self.c
    }
}

/// The weighted K, its unweighted counterpart and their ratio.
#[derive(Debug, Clone)]
pub struct MarkWeightedK {
    pub weighted: SummaryCurve,
    pub unweighted: SummaryCurve,
    pub ratio: SummaryCurve,
}

impl MarkWeightedK {
    pub(crate) fn assemble(tf: TestFunction, weighted: SummaryCurve, unweighted: SummaryCurve) -> Self {
        let ratio_values = weighted
            .values
            .iter()
            .zip(&unweighted.values)
            .map(|(&w, &u)| if u > 0.0 && u.is_finite() { w / u } else { f64::NAN })
            .collect();
        let null = tf.null_value();
        let mut ratio = SummaryCurve::new(
            format!("K[{}]/K", tf.name()),
            weighted.r.clone(),
            ratio_values,
            vec![null; weighted.len()],
        );
        ratio.n_pairs = unweighted.n_pairs.clone();
        ratio.meta = weighted.meta.clone();
        let mut weighted = weighted;
        weighted.label = format!("K[{}]", tf.name());
        weighted.theo = unweighted.theo.iter().map(|t| t * null).collect();
        Self {
            weighted,
            unweighted,
            ratio,
        }
    }
}

/// `lambda^2 rho(r) kappa(r)`.
pub(crate) fn u_statistic(lambda: f64, pcf: &SummaryCurve, kappa: &SummaryCurve, tf: TestFunction) -> SummaryCurve {
    let l2 = lambda * lambda;
    let values = pcf
        .values
        .iter()
        .zip(&kappa.values)
        .map(|(&g, &k)| l2 * g * k)
        .collect();
    let mut out = SummaryCurve::new(
        format!("U[{}]", tf.name()),
        pcf.r.clone(),
        values,
        vec![l2 * tf.null_value(); pcf.len()],
    );
    out.n_pairs = kappa.n_pairs.clone();
    out.meta = kappa.meta.clone();
    out
}
