//! Test functions `t_f(m(x), m(y))` and their normalizing factors `c_{t_f}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `0.5 (m(x) - m(y))^2 / sigma^2`
    Variogram,
    /// Stoyan's mark correlation, `m(x) m(y) / mu^2`
    Stoyan,
    /// r-mark correlation on the first mark, `m(x) / mu`
    RmarkLeft,
    /// r-mark correlation on the second mark, `m(y) / mu`
    RmarkRight,
    /// Beisbart and Kerscher, `(m(x) + m(y)) / (2 mu)`
    Beisbart,
    /// Isham, `(m(x) m(y) - mu^2) / sigma^2`
    Isham,
    /// Stoyan's covariance, `m(x) m(y) - mu^2`
    Covariance,
    /// Schlather's I, centred by the conditional mean mark at distance r
    SchlatherI,
    /// Shimatani's I, centred by the global mean mark
    ShimataniI,
    /// Mark differentiation `1 - min / max`; planar only
    Differentiation,
}

/// Plain moments of a mark vector, population convention (divide by n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// largest |mark|, scale for zero tests
    pub scale: f64,
}

impl Moments {
    pub fn of(marks: &[f64]) -> Self {
        let n = marks.len() as f64;
        let mean = marks.iter().sum::<f64>() / n;
        let variance = marks.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n;
        let scale = marks.iter().fold(0.0f64, |a, m| a.max(m.abs()));
        Self { mean, variance, scale }
    }

    fn variance_is_zero(&self) -> bool {
        self.variance <= (1e-12 * self.scale).powi(2)
    }

    fn mean_is_zero(&self) -> bool {
        self.mean.abs() <= 1e-12 * self.scale
    }
}

impl TestFunction {
    pub const ALL: [TestFunction; 10] = [
        TestFunction::Variogram,
        TestFunction::Stoyan,
        TestFunction::RmarkLeft,
        TestFunction::RmarkRight,
        TestFunction::Beisbart,
        TestFunction::Isham,
        TestFunction::Covariance,
        TestFunction::SchlatherI,
        TestFunction::ShimataniI,
        TestFunction::Differentiation,
    ];

    /// Test functions offered on linear networks (no mark differentiation).
    pub const NETWORK: [TestFunction; 9] = [
        TestFunction::Variogram,
        TestFunction::Stoyan,
        TestFunction::RmarkLeft,
        TestFunction::RmarkRight,
        TestFunction::Beisbart,
        TestFunction::Isham,
        TestFunction::Covariance,
        TestFunction::SchlatherI,
        TestFunction::ShimataniI,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Variogram => "variogram",
            TestFunction::Stoyan => "stoyan",
            TestFunction::RmarkLeft => "rmark_left",
            TestFunction::RmarkRight => "rmark_right",
            TestFunction::Beisbart => "beisbart",
            TestFunction::Isham => "isham",
            TestFunction::Covariance => "covariance",
            TestFunction::SchlatherI => "schlather_I",
            TestFunction::ShimataniI => "shimatani_I",
            TestFunction::Differentiation => "differentiation",
        }
    }

    pub fn available_on_networks(self) -> bool {
        self != TestFunction::Differentiation
    }

    /// Value of the normalized statistic under mark independence.
    pub fn null_value(self) -> f64 {
        match self {
            TestFunction::Isham
            | TestFunction::Covariance
            | TestFunction::SchlatherI
            | TestFunction::ShimataniI
            | TestFunction::Differentiation => 0.0,
            _ => 1.0,
        }
    }

    /// Symmetric in its two arguments.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, TestFunction::RmarkLeft | TestFunction::RmarkRight)
    }

    /// `c_{t_f}` for the given mark vector.
    pub fn normalizer(self, marks: &[f64]) -> Result<f64> {
        let m = Moments::of(marks);
        let name = self.name();
        match self {
            TestFunction::Variogram | TestFunction::Isham | TestFunction::SchlatherI | TestFunction::ShimataniI => {
                if m.variance_is_zero() {
                    Err(Error::ZeroNormalizer(name))
                } else {
                    Ok(m.variance)
                }
            }
            TestFunction::Stoyan => {
                if m.mean_is_zero() {
                    Err(Error::ZeroNormalizer(name))
                } else {
                    Ok(m.mean * m.mean)
                }
            }
            TestFunction::RmarkLeft | TestFunction::RmarkRight => {
                if m.mean_is_zero() {
                    Err(Error::ZeroNormalizer(name))
                } else {
                    Ok(m.mean)
                }
            }
            TestFunction::Beisbart => {
                if m.mean_is_zero() {
                    Err(Error::ZeroNormalizer(name))
                } else {
                    Ok(2.0 * m.mean)
                }
            }
            TestFunction::Covariance => Ok(1.0),
            TestFunction::Differentiation => differentiation_normalizer(marks),
        }
    }

    /// `t_f(a, b)` where `mean` is the global mean mark and `local_mean` the conditional
    /// mean at the pair's distance (used by Schlather's I only).
    pub fn eval(self, a: f64, b: f64, mean: f64, local_mean: f64) -> f64 {
        match self {
            TestFunction::Variogram => 0.5 * (a - b) * (a - b),
            TestFunction::Stoyan => a * b,
            TestFunction::RmarkLeft => a,
            TestFunction::RmarkRight => b,
            TestFunction::Beisbart => a + b,
            TestFunction::Isham | TestFunction::Covariance => a * b - mean * mean,
            TestFunction::SchlatherI => (a - local_mean) * (b - local_mean),
            TestFunction::ShimataniI => (a - mean) * (b - mean),
            TestFunction::Differentiation => {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                if hi == 0.0 {
                    0.0
                } else {
                    1.0 - lo / hi
                }
            }
        }
    }
}

/// `1 - (2 / (n (n - 1))) sum_i R_i / m_(i)` with `R_i` the sum of the `i - 1` smaller marks.
pub fn differentiation_normalizer(marks: &[f64]) -> Result<f64> {
    if marks.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::NonPositiveMarks("differentiation"));
    }
    let n = marks.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut sorted = marks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut running = 0.0;
    let mut acc = 0.0;
    for &m in &sorted {
        acc += running / m;
        running += m;
    }
    let c = 1.0 - 2.0 * acc / (n as f64 * (n as f64 - 1.0));
    if c.abs() <= 1e-12 {
        Err(Error::ZeroNormalizer("differentiation"))
    } else {
        Ok(c)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        TestFunction::ALL
            .into_iter()
            .find(|t| t.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::Config(format!("unknown test function '{s}'")))
    }
}
