use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An estimated function of distance.
///
/// Masked grid points (undefined estimates, e.g. a zero kernel denominator or a degenerate
/// empty-space function) are stored as `NaN` and written as empty cells / `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCurve {
    pub label: String,
    pub r: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub values: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub theo: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pairs: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

pub(crate) mod masked_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(opt.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
    }
}

/// `count` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { max } else { min + step * i as f64 })
                .collect()
        }
    }
}

/// Grids must be non-empty, finite, non-negative and strictly increasing.
pub fn check_grid(r: &[f64]) -> Result<()> {
    let ok = !r.is_empty() && r.iter().all(|v| v.is_finite() && *v >= 0.0) && r.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(Error::UnsortedGrid)
    }
}

impl SummaryCurve {
    pub fn new(label: impl Into<String>, r: Vec<f64>, values: Vec<f64>, theo: Vec<f64>) -> Self {
        debug_assert_eq!(r.len(), values.len());
        debug_assert_eq!(r.len(), theo.len());
        Self {
            label: label.into(),
            r,
            values,
            theo,
            n_pairs: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_pairs(mut self, n_pairs: Vec<usize>) -> Self {
        self.n_pairs = Some(n_pairs);
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn is_masked(&self, i: usize) -> bool {
        !self.values[i].is_finite()
    }

    /// Besag's L-transform `sqrt(K / pi)` of a planar K curve.
    pub fn l_transform(&self) -> SummaryCurve {
        let f = |k: f64| (k.max(0.0) / std::f64::consts::PI).sqrt();
        let mut out = SummaryCurve::new(
            format!("L[{}]", self.label),
            self.r.clone(),
            self.values
                .iter()
                .map(|&k| if k.is_finite() { f(k) } else { f64::NAN })
                .collect(),
            self.theo.iter().map(|&k| f(k)).collect(),
        );
        out.meta = self.meta.clone();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(0.0, 0.3, 4).last(), Some(&0.3));
    }

    #[test]
    fn grid_checks() {
        assert!(check_grid(&[0.0, 0.1, 0.2]).is_ok());
        assert!(check_grid(&[0.0, 0.2, 0.1]).is_err());
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn masked_values_serialize_as_null() {
        let c = SummaryCurve::new("x", vec![0.0, 1.0], vec![f64::NAN, 2.0], vec![1.0, 1.0]);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("[null,2.0]"));
        let back: SummaryCurve = serde_json::from_str(&s).unwrap();
        assert!(back.values[0].is_nan());
        assert_eq!(back.values[1], 2.0);
    }
}
