//! Pointwise Monte-Carlo envelopes.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{masked_vec, SummaryCurve};
use crate::error::{Error, Result};
use crate::pattern::MarkedPattern;
use crate::simulate::{random_label, RngSpec};

pub const DEFAULT_NSIM: usize = 199;
pub const DEFAULT_RANK: usize = 5;

/// Share of replicates that must produce a value at a grid point for it to be reported.
const MIN_VALID_SHARE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub label: String,
    pub r: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub observed: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub theo: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub lo: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub hi: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub mean: Vec<f64>,
    pub n_sim: usize,
    pub rank: usize,
    pub exceed_fraction: f64,
}

impl EnvelopeResult {
    /// Nominal two-sided pointwise level `2 rank / (n_sim + 1)`.
    pub fn nominal_level(&self) -> f64 {
        nominal_level(self.n_sim, self.rank)
    }

    /// Share of reported grid points where `curve` lies inside `[lo, hi]`.
    pub fn inside_fraction(&self, curve: &[f64]) -> f64 {
        let (mut inside, mut total) = (0usize, 0usize);
        for ((&v, &lo), &hi) in curve.iter().zip(&self.lo).zip(&self.hi) {
            if lo.is_finite() && v.is_finite() {
                total += 1;
                if v >= lo && v <= hi {
                    inside += 1;
                }
            }
        }
        if total == 0 {
            1.0
        } else {
            inside as f64 / total as f64
        }
    }

    /// Builds the envelope from an observed curve and already simulated curves.
    pub fn from_curves(observed: &SummaryCurve, sims: &[SummaryCurve], rank: usize) -> Result<Self> {
        let n_sim = sims.len();
        check_params(n_sim, rank)?;
        if sims.iter().any(|s| s.r != observed.r) {
            return Err(Error::GridMismatch);
        }
        let g = observed.len();
        let (mut lo, mut hi, mut mean) = (vec![f64::NAN; g], vec![f64::NAN; g], vec![f64::NAN; g]);
        let mut column = Vec::with_capacity(n_sim);
        for k in 0..g {
            column.clear();
            column.extend(sims.iter().map(|s| s.values[k]).filter(|v| v.is_finite()));
            if (column.len() as f64) < MIN_VALID_SHARE * n_sim as f64 || column.is_empty() {
                continue;
            }
            column.sort_by(f64::total_cmp);
            let rk = rank.min(column.len());
            lo[k] = column[rk - 1];
            hi[k] = column[column.len() - rk];
            mean[k] = column.iter().sum::<f64>() / column.len() as f64;
        }
        let mut out = Self {
            label: observed.label.clone(),
            r: observed.r.clone(),
            observed: observed.values.clone(),
            theo: observed.theo.clone(),
            lo,
            hi,
            mean,
            n_sim,
            rank,
            exceed_fraction: 0.0,
        };
        out.exceed_fraction = 1.0 - out.inside_fraction(&observed.values);
        Ok(out)
    }
}

pub fn nominal_level(n_sim: usize, rank: usize) -> f64 {
    2.0 * rank as f64 / (n_sim as f64 + 1.0)
}

fn check_params(n_sim: usize, rank: usize) -> Result<()> {
    if rank == 0 || n_sim == 0 || n_sim + 1 < 2 * rank {
        Err(Error::InvalidEnvelope { n_sim, rank })
    } else {
        Ok(())
    }
}

/// Evaluates `statistic` on `n_sim` patterns drawn by `null`, replicate `k` on stream `(seed, k)`.
pub fn simulate_curves<S, G>(statistic: &S, null: &G, n_sim: usize, seed: u64) -> Result<Vec<SummaryCurve>>
where
    S: Fn(&MarkedPattern) -> Result<SummaryCurve> + Sync,
    G: Fn(&mut ChaCha8Rng) -> Result<MarkedPattern> + Sync,
{
    (0..n_sim)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngSpec::new(seed, k as u64).rng();
            null(&mut rng)
                .and_then(|q| statistic(&q))
                .map_err(|e| Error::SimulationFailure {
                    replicate: k,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Pointwise envelope of `statistic` under a null pattern generator.
pub fn pointwise_envelope<S, G>(
    observed: &MarkedPattern,
    statistic: S,
    null: G,
    n_sim: usize,
    rank: usize,
    seed: u64,
) -> Result<EnvelopeResult>
where
    S: Fn(&MarkedPattern) -> Result<SummaryCurve> + Sync,
    G: Fn(&mut ChaCha8Rng) -> Result<MarkedPattern> + Sync,
{
    check_params(n_sim, rank)?;
    let obs = statistic(observed)?;
    let sims = simulate_curves(&statistic, &null, n_sim, seed)?;
    EnvelopeResult::from_curves(&obs, &sims, rank)
}

/// Envelope under random permutation of the marks over the fixed locations.
pub fn random_labeling_envelope<S>(
    p: &MarkedPattern,
    statistic: S,
    n_sim: usize,
    rank: usize,
    seed: u64,
) -> Result<EnvelopeResult>
where
    S: Fn(&MarkedPattern) -> Result<SummaryCurve> + Sync,
{
    if p.marks().is_none() && p.types().is_none() {
        return Err(Error::NoMarks);
    }
    pointwise_envelope(
        p,
        statistic,
        |rng: &mut ChaCha8Rng| random_label(p, rng),
        n_sim,
        rank,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(v: Vec<f64>) -> SummaryCurve {
        let n = v.len();
        SummaryCurve::new("c", (0..n).map(|i| i as f64).collect(), v, vec![0.0; n])
    }

    #[test]
    fn single_curve_envelope() {
        let c = curve(vec![1.0, 2.0]);
        let e = EnvelopeResult::from_curves(&c, std::slice::from_ref(&c), 1).unwrap();
        assert_eq!(e.lo, e.hi);
        assert_eq!(e.lo, vec![1.0, 2.0]);
        assert_eq!(e.exceed_fraction, 0.0);
    }

    #[test]
    fn nominal() {
        assert!((nominal_level(199, 5) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rank_monotone_and_masking() {
        let sims: Vec<SummaryCurve> = (0..20)
            .map(|i| {
                curve(vec![
                    i as f64,
                    if i == 0 { f64::NAN } else { 1.0 },
                    if i < 3 { f64::NAN } else { 0.0 },
                ])
            })
            .collect();
        let obs = curve(vec![30.0, 1.0, 0.0]);
        let e1 = EnvelopeResult::from_curves(&obs, &sims, 1).unwrap();
        let e5 = EnvelopeResult::from_curves(&obs, &sims, 5).unwrap();
        assert!(e1.lo[0] <= e5.lo[0] && e1.hi[0] >= e5.hi[0]);
        assert!(e1.lo[1].is_finite(), "19 of 20 replicates are enough");
        assert!(e1.lo[2].is_nan(), "17 of 20 replicates are not");
        assert_eq!(e1.exceed_fraction, 0.5);
    }

    #[test]
    fn invalid_parameters() {
        let c = curve(vec![1.0]);
        assert!(EnvelopeResult::from_curves(&c, std::slice::from_ref(&c), 2).is_err());
        let other = SummaryCurve::new("c", vec![5.0], vec![1.0], vec![0.0]);
        assert!(matches!(
            EnvelopeResult::from_curves(&c, &[other], 1),
            Err(Error::GridMismatch)
        ));
    }
}
