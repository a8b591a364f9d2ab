//! Simulation study of Stoyan's mark correlation on a dendrite-like network under mark Models I-III.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{linspace, SummaryCurve};
use crate::envelope::{random_labeling_envelope, EnvelopeResult};
use crate::error::{Error, Result};
use crate::io::{output_path, write_curve, write_json, write_network_csv, CurveFormat, CurveTable};
use crate::metric::NetworkMetric;
use crate::network::LinearNetwork;
use crate::pattern::MarkedPattern;
use crate::simulate::{dendrite_like_network, mark_model, uniform_on_network, MarkModel, ModelParams, RngSpec};
use crate::testfn::TestFunction;
use crate::window::Window;
use crate::{network_stats, planar};

/// Stream reserved for drawing the network itself.
const NETWORK_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub seed: u64,
    pub n_points: usize,
    pub n_sim: usize,
    pub rank: usize,
    pub grid_count: usize,
    /// upper end of the network distance grid; the planar grid ends at `r_max / ratio`
    pub network_r_max: f64,
    pub ratio: f64,
    pub depth: usize,
    pub branch_angle: f64,
    pub length_decay: f64,
    /// shortest-path diameter the generated network is rescaled to
    pub diameter: f64,
    pub params: ModelParams,
    pub bandwidth_planar: Option<f64>,
    pub bandwidth_network: Option<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            n_points: 100,
            n_sim: 199,
            rank: 5,
            grid_count: 51,
            network_r_max: 250.0,
            ratio: 1.25,
            depth: 6,
            branch_angle: 1.0,
            length_decay: 0.65,
            diameter: 500.0,
            params: ModelParams::default(),
            bandwidth_planar: None,
            bandwidth_network: None,
        }
    }
}

/// Network, window and metric shared by all replicates.
#[derive(Debug, Clone)]
pub struct StudySetting {
    pub network: Arc<LinearNetwork>,
    pub metric: Arc<NetworkMetric>,
    pub window: Window,
    pub r_network: Vec<f64>,
    pub r_planar: Vec<f64>,
}

impl StudySetting {
    pub fn new(config: &StudyConfig) -> Result<Self> {
        let mut rng = RngSpec::new(config.seed, NETWORK_STREAM).rng();
        let raw = dendrite_like_network(config.depth, config.branch_angle, config.length_decay, &mut rng)?;
        let diameter = NetworkMetric::new(Arc::new(raw.clone())).vertex_diameter();
        let factor = config.diameter / diameter;
        let (x0, _, y0, _) = raw.bounding_box();
        let net = raw.transformed(factor, [-x0 * factor, -y0 * factor])?;
        let (x0, x1, y0, y1) = net.bounding_box();
        let window = Window::rectangle(x0, x1, y0, y1)?;
        let network = Arc::new(net);
        let metric = Arc::new(NetworkMetric::new(network.clone()));
        let r_network = linspace(0.0, config.network_r_max, config.grid_count);
        let r_planar = r_network.iter().map(|r| r / config.ratio).collect();
        Ok(Self {
            network,
            metric,
            window,
            r_network,
            r_planar,
        })
    }

    /// Replicate `k` of `model`: uniform points, model marks, on the network and in the window.
    pub fn replicate(
        &self,
        config: &StudyConfig,
        model: MarkModel,
        k: usize,
    ) -> Result<(MarkedPattern, MarkedPattern)> {
        let stream = model_index(model) * 1_000_000 + k as u64;
        let mut rng = RngSpec::new(config.seed, stream).rng();
        let p = uniform_on_network(&self.metric, config.n_points, &mut rng);
        let marked = mark_model(&p, model, config.params)?;
        let flat = MarkedPattern::planar(self.window.clone(), marked.coords().to_vec())?
            .with_marks(marked.marks().expect("model marks").to_vec())?;
        Ok((marked, flat))
    }
}

fn model_index(m: MarkModel) -> u64 {
    match m {
        MarkModel::I => 0,
        MarkModel::II => 1,
        MarkModel::III => 2,
    }
}

/// Curves and envelopes for one mark model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: MarkModel,
    /// envelope of the simulated curves; `observed` holds their mean
    pub planar: EnvelopeResult,
    pub network: EnvelopeResult,
    /// first realization against its random-labelling envelope
    pub labeling_planar: EnvelopeResult,
    pub labeling_network: EnvelopeResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub network_length: f64,
    pub network_diameter: f64,
    pub models: Vec<ModelResult>,
}

fn mean_envelope(sims: &[SummaryCurve], rank: usize) -> Result<EnvelopeResult> {
    let g = sims[0].len();
    let mean: Vec<f64> = (0..g)
        .map(|k| {
            let vals: Vec<f64> = sims.iter().map(|s| s.values[k]).filter(|v| v.is_finite()).collect();
            if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        })
        .collect();
    let mut observed = sims[0].clone();
    observed.values = mean;
    EnvelopeResult::from_curves(&observed, sims, rank)
}

pub fn planar_statistic(config: &StudyConfig, r: &[f64]) -> impl Fn(&MarkedPattern) -> Result<SummaryCurve> + Sync {
    let r = r.to_vec();
    let h = config.bandwidth_planar;
    move |p| planar::tf_correlation(p, TestFunction::Stoyan, &r, h)
}

pub fn network_statistic(config: &StudyConfig, r: &[f64]) -> impl Fn(&MarkedPattern) -> Result<SummaryCurve> + Sync {
    let r = r.to_vec();
    let h = config.bandwidth_network;
    move |p| network_stats::tf_correlation(p, TestFunction::Stoyan, &r, h)
}

pub fn run_model(config: &StudyConfig, setting: &StudySetting, model: MarkModel) -> Result<ModelResult> {
    let planar_stat = planar_statistic(config, &setting.r_planar);
    let network_stat = network_statistic(config, &setting.r_network);
    let curves: Vec<(SummaryCurve, SummaryCurve)> = (0..config.n_sim)
        .into_par_iter()
        .map(|k| {
            let run = || -> Result<_> {
                let (net, flat) = setting.replicate(config, model, k)?;
                Ok((planar_stat(&flat)?, network_stat(&net)?))
            };
            run().map_err(|e| Error::SimulationFailure {
                replicate: k,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let (planar_curves, network_curves): (Vec<_>, Vec<_>) = curves.into_iter().unzip();
    let (net0, flat0) = setting.replicate(config, model, 0)?;
    let label_seed = config.seed ^ (0xA5A5_0000 + model_index(model));
    Ok(ModelResult {
        model,
        planar: mean_envelope(&planar_curves, config.rank)?,
        network: mean_envelope(&network_curves, config.rank)?,
        labeling_planar: random_labeling_envelope(&flat0, &planar_stat, config.n_sim, config.rank, label_seed)?,
        labeling_network: random_labeling_envelope(&net0, &network_stat, config.n_sim, config.rank, label_seed)?,
    })
}

pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    let setting = StudySetting::new(config)?;
    let models = MarkModel::ALL
        .iter()
        .map(|&m| run_model(config, &setting, m))
        .collect::<Result<_>>()?;
    Ok(StudyResult {
        config: config.clone(),
        network_length: setting.network.total_length(),
        network_diameter: setting.metric.vertex_diameter(),
        models,
    })
}

/// Outcome of one qualitative comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// First grid distance where the curve passes from above `level` to below it, by linear interpolation.
pub fn downward_crossing(r: &[f64], v: &[f64], level: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = r
        .iter()
        .copied()
        .zip(v.iter().copied())
        .filter(|(_, y)| y.is_finite())
        .collect();
    let mut seen_above = false;
    for w in pts.windows(2) {
        let ((r0, y0), (r1, y1)) = (w[0], w[1]);
        seen_above |= y0 > level;
        if seen_above && y0 >= level && y1 < level {
            return Some(r0 + (y0 - level) / (y0 - y1) * (r1 - r0));
        }
    }
    None
}

fn model(result: &StudyResult, m: MarkModel) -> &ModelResult {
    result.models.iter().find(|x| x.model == m).expect("all models are run")
}

/// The qualitative behaviour expected of the three models.
pub fn qualitative_checks(result: &StudyResult) -> Vec<Check> {
    let mut out = Vec::new();
    let rmax_l = result.config.network_r_max;
    let rmax_p = rmax_l / result.config.ratio;

    let m1 = model(result, MarkModel::I);
    let (r, v) = (&m1.network.r, &m1.network.observed);
    let lower_ok = r
        .iter()
        .zip(v)
        .filter(|(x, y)| **x <= 0.5 * rmax_l && y.is_finite())
        .all(|(_, y)| *y > 1.0);
    let crossing = downward_crossing(r, v, 1.0);
    let target = 0.7 * rmax_l;
    let cross_ok = crossing.is_some_and(|c| c > 0.5 * rmax_l && (c - target).abs() <= 0.25 * rmax_l);
    out.push(Check {
        name: "model I network: above 1 on the lower half, crossing near 0.7 of the axis".into(),
        passed: lower_ok && cross_ok,
        detail: format!("above 1 on lower half: {lower_ok}; downward crossing at {crossing:?}"),
    });
    let inside = m1.labeling_planar.inside_fraction(&m1.planar.observed);
    out.push(Check {
        name: "model I planar: mean inside the random-labelling envelope at >= 80% of the grid".into(),
        passed: inside >= 0.8,
        detail: format!("inside fraction {inside:.3}"),
    });

    let m2 = model(result, MarkModel::II);
    let cp = downward_crossing(&m2.planar.r, &m2.planar.observed, 1.0).map(|c| c / rmax_p);
    let cn = downward_crossing(&m2.network.r, &m2.network.observed, 1.0).map(|c| c / rmax_l);
    let passed = match (cp, cn) {
        (Some(p), Some(n)) => p < n,
        (Some(_), None) => true,
        _ => false,
    };
    out.push(Check {
        name: "model II: planar crossing earlier on its axis than the network crossing".into(),
        passed,
        detail: format!("planar crossing fraction {cp:?}, network crossing fraction {cn:?}"),
    });

    let m3 = model(result, MarkModel::III);
    let (r, v) = (&m3.network.r, &m3.network.observed);
    let (kmax, vmax) = v
        .iter()
        .enumerate()
        .filter(|(_, y)| y.is_finite())
        .fold((0, f64::NEG_INFINITY), |a, (k, &y)| if y > a.1 { (k, y) } else { a });
    let first = v.iter().copied().find(|y| y.is_finite()).unwrap_or(f64::NAN);
    let last = v.iter().rev().copied().find(|y| y.is_finite()).unwrap_or(f64::NAN);
    let peak_ok = r[kmax] <= 0.3 * rmax_l && vmax > first && vmax > last;
    out.push(Check {
        name: "model III network: rises to a maximum in the lower 30% of the axis, then falls".into(),
        passed: peak_ok,
        detail: format!("maximum {vmax:.4} at {:.1}; first {first:.4}, last {last:.4}", r[kmax]),
    });
    let (r, v) = (&m3.planar.r, &m3.planar.observed);
    let lower: Vec<f64> = r
        .iter()
        .zip(v)
        .filter(|(x, y)| **x <= 0.5 * rmax_p && y.is_finite())
        .map(|(_, y)| *y)
        .collect();
    let worst_rise = lower.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check {
        name: "model III planar: non-increasing over the lower half".into(),
        passed: worst_rise <= 0.0,
        detail: format!("largest step increase {worst_rise:.3e}"),
    });
    out
}

/// Summary written next to the curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub network_length: f64,
    pub network_diameter: f64,
    pub network_vertices: usize,
    pub network_segments: usize,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

/// Writes `mean_model{I,II,III}_{planar,network}`, the random-labelling envelopes under
/// `labeling/`, the network as `network.csv` and `report.json`. Returns the report.
pub fn write_outputs(result: &StudyResult, dir: &Path, format: CurveFormat) -> Result<StudyReport> {
    let setting = StudySetting::new(&result.config)?;
    std::fs::create_dir_all(dir.join("labeling"))?;
    let mut files = Vec::new();
    for m in &result.models {
        for (kind, env, lab) in [
            ("planar", &m.planar, &m.labeling_planar),
            ("network", &m.network, &m.labeling_network),
        ] {
            let stem = format!("mean_model{}_{kind}", m.model);
            let main = output_path(dir, &stem, format);
            write_curve(&CurveTable::from(env), &main, format)?;
            let side = output_path(&dir.join("labeling"), &stem, format);
            write_curve(&CurveTable::from(lab), &side, format)?;
            for p in [main, side] {
                files.push(p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().replace('\\', "/"));
            }
        }
    }
    write_network_csv(&setting.network, dir.join("network.csv"))?;
    files.push("network.csv".into());
    let report = StudyReport {
        config: result.config.clone(),
        network_length: result.network_length,
        network_diameter: result.network_diameter,
        network_vertices: setting.network.n_vertices(),
        network_segments: setting.network.n_segments(),
        checks: qualitative_checks(result),
        files,
    };
    write_json(&report, dir.join("report.json"))?;
    Ok(report)
}
