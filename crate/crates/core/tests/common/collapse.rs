//! On a single segment every network estimator reduces to an interval estimator with
//! distances `|x - y|` and perimeter counts from the two interval ends.

use super::*;
use linmark::curve::linspace;
use linmark::network_stats as ns;
use linmark::{IntensitySurface, MarkedPattern, NetworkLocation, Target, TestFunction};
use rand::Rng;

const LEN: f64 = 10.0;
const TOL: f64 = 1e-9;

struct Interval {
    x: Vec<f64>,
    types: Vec<u32>,
    m1: Vec<f64>,
    m2: Vec<f64>,
}

impl Interval {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = rng(seed, 0);
        let x = (0..n).map(|_| rng.random::<f64>() * LEN).collect();
        let types = (0..n).map(|i| if i % 3 == 0 { 2 } else { 1 }).collect();
        let m1 = (0..n).map(|_| 0.5 + rng.random::<f64>() * 2.0).collect();
        let m2 = (0..n).map(|_| 1.0 + rng.random::<f64>()).collect();
        Self { x, types, m1, m2 }
    }

    fn n(&self) -> usize {
        self.x.len()
    }

    fn pattern(&self) -> MarkedPattern {
        let locs = self.x.iter().map(|&x| NetworkLocation::new(0, x)).collect();
        MarkedPattern::on_network(segment(LEN), locs)
            .unwrap()
            .with_types(self.types.clone())
            .unwrap()
            .with_marks(self.m1.clone())
            .unwrap()
            .with_second_marks(self.m2.clone())
            .unwrap()
    }

    fn w(&self, from: f64, d: f64) -> f64 {
        1.0 / interval_perimeter(from, d, LEN).max(1) as f64
    }

    /// ordered pairs `(i, j, d, w)`
    fn pairs(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i != j {
                    let d = (self.x[i] - self.x[j]).abs();
                    out.push((i, j, d, self.w(self.x[i], d)));
                }
            }
        }
        out
    }

    fn count(&self, t: u32) -> usize {
        self.types.iter().filter(|&&x| x == t).count()
    }
}

fn grid() -> Vec<f64> {
    linspace(0.0, 4.0, 41)
}

pub fn k_function() {
    let s = Interval::new(30, 1);
    let p = s.pattern();
    let r = grid();
    let lam = IntensitySurface::homogeneous(&p, Target::Type(2)).unwrap();
    let got = ns::cross_k(&p, Target::Type(1), Target::Type(2), &lam, &r).unwrap();
    let lambda2 = s.count(2) as f64 / LEN;
    let want: Vec<f64> = r
        .iter()
        .map(|&rk| {
            let sum: f64 = s
                .pairs()
                .iter()
                .filter(|&&(i, j, d, _)| s.types[i] == 1 && s.types[j] == 2 && d <= rk)
                .map(|&(_, _, _, w)| w / lambda2)
                .sum();
            sum / s.count(1) as f64
        })
        .collect();
    assert_close(&got.values, &want, TOL, "K12");
}

pub fn pair_correlation() {
    let s = Interval::new(25, 2);
    let p = s.pattern();
    let r = grid();
    let h = 0.4;
    let lam = IntensitySurface::homogeneous(&p, Target::All).unwrap();
    let got = ns::cross_pcf(&p, Target::All, Target::All, &lam, &r, Some(h)).unwrap();
    let lambda = s.n() as f64 / LEN;
    let want: Vec<f64> = r
        .iter()
        .map(|&rk| {
            let mut sum = 0.0;
            let mut hits = 0;
            for &(_, _, d, w) in &s.pairs() {
                let k = epanechnikov(rk - d, h);
                if k > 0.0 {
                    hits += 1;
                    sum += k * w / lambda;
                }
            }
            if hits == 0 {
                f64::NAN
            } else {
                sum / s.n() as f64
            }
        })
        .collect();
    assert_close(&got.values, &want, TOL, "pcf");
}

/// Origins are `(position, own index)`; an origin never counts itself as a neighbour.
fn survival(s: &Interval, origins: &[(f64, Option<usize>)], targets: &[usize], r: f64, lbar_over_lambda: f64) -> f64 {
    let total: f64 = origins
        .iter()
        .map(|&(u, own)| {
            targets
                .iter()
                .filter(|&&j| Some(j) != own)
                .map(|&j| (u - s.x[j]).abs())
                .filter(|&d| d <= r)
                .map(|d| 1.0 - (lbar_over_lambda * s.w(u, d)).clamp(0.0, 1.0))
                .product::<f64>()
        })
        .sum();
    total / origins.len() as f64
}

pub fn nearest_neighbour_and_empty_space() {
    let s = Interval::new(20, 3);
    let p = s.pattern();
    let r = grid();
    let lam = IntensitySurface::homogeneous(&p, Target::Type(1)).unwrap();
    let dummy: Vec<NetworkLocation> = (0..200)
        .map(|k| NetworkLocation::new(0, (k as f64 + 0.5) * LEN / 200.0))
        .collect();
    let nn = ns::cross_j(&p, Target::Type(2), Target::Type(1), &lam, Some(&dummy), &r).unwrap();

    let from: Vec<(f64, Option<usize>)> = (0..s.n())
        .filter(|&i| s.types[i] == 2)
        .map(|i| (s.x[i], Some(i)))
        .collect();
    let to: Vec<usize> = (0..s.n()).filter(|&i| s.types[i] == 1).collect();
    let u: Vec<(f64, Option<usize>)> = dummy.iter().map(|l| (l.offset, None)).collect();
    let h: Vec<f64> = r.iter().map(|&rk| 1.0 - survival(&s, &from, &to, rk, 1.0)).collect();
    let f: Vec<f64> = r.iter().map(|&rk| 1.0 - survival(&s, &u, &to, rk, 1.0)).collect();
    let j: Vec<f64> = h
        .iter()
        .zip(&f)
        .map(|(h, f)| {
            if 1.0 - f >= 1e-6 {
                (1.0 - h) / (1.0 - f)
            } else {
                f64::NAN
            }
        })
        .collect();
    assert_close(&nn.h.values, &h, TOL, "H21");
    assert_close(&nn.f.values, &f, TOL, "F1");
    assert_close(&nn.j.values, &j, TOL, "J21");

    let lambdas: Vec<IntensitySurface> = (1..=2)
        .map(|t| IntensitySurface::homogeneous(&p, Target::Type(t)).unwrap())
        .collect();
    let full = IntensitySurface::homogeneous(&p, Target::All).unwrap();
    let i = ns::i_function(&p, &lambdas, &full, Some(&dummy), &r).unwrap();
    let jt = |t: Option<u32>| -> Vec<f64> {
        let idx: Vec<usize> = (0..s.n()).filter(|&i| t.is_none_or(|t| s.types[i] == t)).collect();
        let xs: Vec<(f64, Option<usize>)> = idx.iter().map(|&i| (s.x[i], Some(i))).collect();
        r.iter()
            .map(|&rk| {
                let h = 1.0 - survival(&s, &xs, &idx, rk, 1.0);
                let f = 1.0 - survival(&s, &u, &idx, rk, 1.0);
                if 1.0 - f >= 1e-6 {
                    (1.0 - h) / (1.0 - f)
                } else {
                    f64::NAN
                }
            })
            .collect()
    };
    let (j1, j2, jall) = (jt(Some(1)), jt(Some(2)), jt(None));
    let n = s.n() as f64;
    let (p1, p2) = (s.count(1) as f64 / n, s.count(2) as f64 / n);
    let want: Vec<f64> = (0..r.len()).map(|k| p1 * j1[k] + p2 * j2[k] - jall[k]).collect();
    assert_close(&i.values, &want, TOL, "I");
}

fn nw(s: &Interval, r: f64, h: f64, t: impl Fn(usize, usize) -> f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(i, j, d, w) in &s.pairs() {
        let k = epanechnikov(r - d, h);
        num += k * w * t(i, j);
        den += k * w;
    }
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

pub fn mark_correlations() {
    let s = Interval::new(30, 4);
    let p = s.pattern();
    let r = grid();
    let h = 0.5;
    let m = &s.m1;
    let n = m.len() as f64;
    let mu = m.iter().sum::<f64>() / n;
    let var = m.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
    type PairFn<'a> = Box<dyn Fn(usize, usize) -> f64 + 'a>;
    let cases: Vec<(TestFunction, f64, PairFn)> = vec![
        (TestFunction::Stoyan, mu * mu, Box::new(|i, j| m[i] * m[j])),
        (
            TestFunction::Variogram,
            var,
            Box::new(|i, j| 0.5 * (m[i] - m[j]).powi(2)),
        ),
        (TestFunction::RmarkLeft, mu, Box::new(|i, _| m[i])),
        (TestFunction::RmarkRight, mu, Box::new(|_, j| m[j])),
        (TestFunction::Beisbart, 2.0 * mu, Box::new(|i, j| m[i] + m[j])),
        (TestFunction::Isham, var, Box::new(move |i, j| m[i] * m[j] - mu * mu)),
        (
            TestFunction::Covariance,
            1.0,
            Box::new(move |i, j| m[i] * m[j] - mu * mu),
        ),
        (
            TestFunction::ShimataniI,
            var,
            Box::new(move |i, j| (m[i] - mu) * (m[j] - mu)),
        ),
    ];
    for (tf, c, t) in cases {
        let got = ns::tf_correlation(&p, tf, &r, Some(h)).unwrap();
        let want: Vec<f64> = r.iter().map(|&rk| nw(&s, rk, h, &t) / c).collect();
        assert_close(&got.values, &want, TOL, tf.name());
    }

    let got = ns::tf_correlation(&p, TestFunction::SchlatherI, &r, Some(h)).unwrap();
    let want: Vec<f64> = r
        .iter()
        .map(|&rk| {
            let local = nw(&s, rk, h, |i, _| m[i]);
            nw(&s, rk, h, |i, j| (m[i] - local) * (m[j] - local)) / var
        })
        .collect();
    assert_close(&got.values, &want, TOL, "schlather_I");

    let got = ns::bivariate_mark_correlation(&p, &r, Some(h)).unwrap();
    let mu2 = s.m2.iter().sum::<f64>() / n;
    let want: Vec<f64> = r
        .iter()
        .map(|&rk| nw(&s, rk, h, |i, j| m[i] * s.m2[j]) / (mu * mu2))
        .collect();
    assert_close(&got.values, &want, TOL, "bivariate");

    let got = ns::u_statistic(&p, TestFunction::Stoyan, &r, Some(h)).unwrap();
    let lambda = n / LEN;
    let want: Vec<f64> = r
        .iter()
        .map(|&rk| {
            let mut g = 0.0;
            let mut hits = 0;
            for &(_, _, d, w) in &s.pairs() {
                let k = epanechnikov(rk - d, h);
                if k > 0.0 {
                    hits += 1;
                    g += k * w / lambda;
                }
            }
            let g = if hits == 0 { f64::NAN } else { g / n };
            lambda * lambda * g * nw(&s, rk, h, |i, j| m[i] * m[j]) / (mu * mu)
        })
        .collect();
    assert_close(&got.values, &want, TOL, "U");
}

pub fn mark_weighted_k() {
    let s = Interval::new(30, 5);
    let p = s.pattern();
    let r = grid();
    let m = &s.m1;
    let n = m.len() as f64;
    let mu = m.iter().sum::<f64>() / n;
    let lambda = n / LEN;
    let got = ns::mark_weighted_k(&p, TestFunction::Stoyan, None, &r, Some(0.5)).unwrap();
    let weighted: Vec<f64> = r
        .iter()
        .map(|&rk| {
            s.pairs()
                .iter()
                .filter(|q| q.2 <= rk)
                .map(|&(i, j, _, w)| w * m[i] * m[j] / (mu * mu) / lambda)
                .sum::<f64>()
                / n
        })
        .collect();
    let plain: Vec<f64> = r
        .iter()
        .map(|&rk| {
            s.pairs()
                .iter()
                .filter(|q| q.2 <= rk)
                .map(|q| q.3 / lambda)
                .sum::<f64>()
                / n
        })
        .collect();
    assert_close(&got.weighted.values, &weighted, TOL, "weighted K");
    assert_close(&got.unweighted.values, &plain, TOL, "K");
    let ratio: Vec<f64> = weighted
        .iter()
        .zip(&plain)
        .map(|(w, k)| if *k > 0.0 { w / k } else { f64::NAN })
        .collect();
    assert_close(&got.ratio.values, &ratio, TOL, "ratio");
}

pub fn type_statistics() {
    let s = Interval::new(30, 6);
    let p = s.pattern();
    let r = grid();
    let h = 0.6;
    let n = s.n() as f64;
    let (n1, n2) = (s.count(1) as f64, s.count(2) as f64);
    let smooth = |rk: f64, pick: &dyn Fn(usize, usize) -> bool| -> f64 {
        s.pairs()
            .iter()
            .filter(|q| pick(q.0, q.1))
            .map(|&(_, _, d, w)| epanechnikov(rk - d, h) * w)
            .sum()
    };
    let got = ns::mark_connection(&p, 1, 2, &r, Some(h)).unwrap();
    let want: Vec<f64> = r
        .iter()
        .map(|&rk| {
            let all = smooth(rk, &|_, _| true);
            if all <= 0.0 {
                return f64::NAN;
            }
            let cross = smooth(rk, &|i, j| s.types[i] == 1 && s.types[j] == 2);
            (n1 / n) * (n2 / n) * (cross / (n1 * n2)) / (all / (n * (n - 1.0)))
        })
        .collect();
    assert_close(&got.values, &want, TOL, "p12");

    let got = ns::mark_equality(&p, &r, Some(h)).unwrap();
    let want: Vec<f64> = r
        .iter()
        .map(|&rk| {
            let all = smooth(rk, &|_, _| true);
            if all <= 0.0 {
                return f64::NAN;
            }
            [(1u32, n1), (2, n2)]
                .iter()
                .map(|&(t, c)| {
                    let same = smooth(rk, &|i, j| s.types[i] == t && s.types[j] == t);
                    (c / n).powi(2) * (same / (c * (c - 1.0))) / (all / (n * (n - 1.0)))
                })
                .sum()
        })
        .collect();
    assert_close(&got.values, &want, TOL, "p_eq");

    let got = ns::mingling(&p, &r).unwrap();
    let constant = 2.0 * n1 * n2 / (n * (n - 1.0));
    let want: Vec<f64> = r
        .iter()
        .map(|&rk| {
            let within: Vec<_> = s.pairs().into_iter().filter(|q| q.2 <= rk).collect();
            if within.is_empty() {
                return f64::NAN;
            }
            let mixed = within.iter().filter(|q| s.types[q.0] != s.types[q.1]).count();
            mixed as f64 / within.len() as f64 / constant
        })
        .collect();
    assert_close(&got.values, &want, TOL, "mingling");
}
