//! Command-line interface.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::{linspace, SummaryCurve};
use crate::envelope::{pointwise_envelope, random_labeling_envelope, DEFAULT_NSIM, DEFAULT_RANK};
use crate::error::{Error, Result};
use crate::intensity::{IntensitySurface, NetworkIntensityMode};
use crate::io::{
    read_network, read_pattern_table, write_curve, write_json, write_network_csv, write_pattern_csv, CurveFormat,
    CurveTable, PatternTable,
};
use crate::metric::NetworkMetric;
use crate::network::LinearNetwork;
use crate::pattern::{MarkedPattern, Target};
use crate::planar::Correction;
use crate::repro::{run_study, write_outputs, StudyConfig};
use crate::simulate::{
    binomial_planar, dendrite_like_network, mark_model, poisson_on_network, poisson_planar, uniform_locations,
    uniform_on_network, MarkModel, RngSpec,
};
use crate::testfn::TestFunction;
use crate::window::Window;
use crate::{network_stats, planar};

#[derive(Debug, Parser)]
#[command(
    name = "linmark",
    version,
    about = "Marked point pattern summaries on planar windows and linear networks"
)]
pub struct Cli {
    /// worker threads; defaults to all cores
    #[arg(long, global = true, env = "LINMARK_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one summary characteristic
    Summarize(SummarizeArgs),
    /// Pointwise Monte-Carlo envelope of a summary characteristic
    Envelope(EnvelopeArgs),
    /// Generate a pattern, optionally on a generated network
    Simulate(SimulateArgs),
    /// Pairwise shortest-path distances and disc perimeter counts
    Distances(DistancesArgs),
    /// Run the dendrite simulation study under mark Models I-III
    Repro(ReproArgs),
}

/// `min:max:count`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("grid '{s}' is not min:max:count"));
        };
        let min: f64 = a.parse().map_err(|_| format!("bad grid minimum '{a}'"))?;
        let max: f64 = b.parse().map_err(|_| format!("bad grid maximum '{b}'"))?;
        let count: usize = c.parse().map_err(|_| format!("bad grid count '{c}'"))?;
        if count < 2 {
            return Err("grid count must be at least 2".into());
        }
        if !(min >= 0.0 && max > min && max.is_finite()) {
            return Err(format!("grid needs 0 <= min < max, got {min}..{max}"));
        }
        Ok(Self { min, max, count })
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.count)
    }
}

/// `xmin:xmax:ymin:ymax`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec(pub [f64; 4]);

impl FromStr for WindowSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v: Vec<f64> = s
            .split(':')
            .map(|x| x.parse::<f64>().map_err(|_| format!("bad window bound '{x}'")))
            .collect::<std::result::Result<_, _>>()?;
        match v.as_slice() {
            &[a, b, c, d] => Ok(Self([a, b, c, d])),
            _ => Err(format!("window '{s}' is not xmin:xmax:ymin:ymax")),
        }
    }
}

impl WindowSpec {
    pub fn window(&self) -> Result<Window> {
        let [a, b, c, d] = self.0;
        Window::rectangle(a, b, c, d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Statistic {
    K,
    L,
    Pcf,
    H,
    F,
    J,
    I,
    KUncorrected,
    MarkConnection,
    MarkEquality,
    Mingling,
    Markcorr,
    MarkWeightedK,
    MarkWeightedKRatio,
    U,
    Bivariate,
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Statistic as ValueEnum>::from_str(s, true).map_err(|_| Error::Config(format!("unknown statistic '{s}'")))
    }
}

impl FromStr for IntensityChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <IntensityChoice as ValueEnum>::from_str(s, true).map_err(|_| Error::Config(format!("unknown intensity '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntensityChoice {
    Homogeneous,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatChoice {
    Csv,
    Json,
}

impl From<FormatChoice> for CurveFormat {
    fn from(f: FormatChoice) -> Self {
        match f {
            FormatChoice::Csv => CurveFormat::Csv,
            FormatChoice::Json => CurveFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StatArgs {
    /// pattern CSV with columns x,y[,type][,mark1][,mark2]
    #[arg(long)]
    pub pattern: PathBuf,
    /// network file (CSV of segments or GeoJSON); points are snapped onto it
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// rectangular window; defaults to the bounding box of the points
    #[arg(long)]
    pub window: Option<WindowSpec>,
    #[command(flatten)]
    pub options: StatOptions,
}

/// Choice of statistic and its tuning, independent of where the pattern comes from.
#[derive(Debug, Clone, Args)]
pub struct StatOptions {
    #[arg(long, value_enum)]
    pub stat: Statistic,
    /// test function for markcorr, mark-weighted K and U
    #[arg(long = "tf", default_value = "stoyan")]
    pub test_function: String,
    /// origin type label, or `all`
    #[arg(long = "from", default_value = "all")]
    pub from: String,
    /// target type label, or `all`
    #[arg(long = "to", default_value = "all")]
    pub to: String,
    /// distance grid `min:max:count`; defaults to 51 points up to a quarter of the shorter
    /// window side or of the network diameter
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// smoothing bandwidth for kernel estimators and intensity
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// planar edge correction: none, border, translation or isotropic
    #[arg(long)]
    pub correction: Option<String>,
    #[arg(long, value_enum, default_value = "homogeneous")]
    pub intensity: IntensityChoice,
}

impl StatOptions {
    pub fn new(stat: Statistic) -> Self {
        Self {
            stat,
            test_function: "stoyan".into(),
            from: "all".into(),
            to: "all".into(),
            grid: None,
            bandwidth: None,
            correction: None,
            intensity: IntensityChoice::Homogeneous,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub stat: StatArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// defaults to the extension of `--out`
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NullChoice {
    /// permute types and marks over the fixed locations
    Labeling,
    /// uniform relocation keeping the number of points and their marks
    Csr,
}

#[derive(Debug, Clone, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub stat: StatArgs,
    #[arg(long, value_enum, default_value = "labeling")]
    pub null: NullChoice,
    #[arg(long, default_value_t = DEFAULT_NSIM)]
    pub nsim: usize,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    pub rank: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// simulate on this network
    #[arg(long, conflicts_with_all = ["window", "dendrite"])]
    pub network: Option<PathBuf>,
    /// simulate in this rectangle
    #[arg(long, conflicts_with = "dendrite")]
    pub window: Option<WindowSpec>,
    /// generate a dendrite-like network `depth:branch_angle:length_decay` and simulate on it
    #[arg(long)]
    pub dendrite: Option<String>,
    /// rescale the generated dendrite to this shortest-path diameter
    #[arg(long, requires = "dendrite")]
    pub diameter: Option<f64>,
    /// exact number of points
    #[arg(long, conflicts_with = "lambda")]
    pub n: Option<usize>,
    /// Poisson intensity per unit length or area
    #[arg(long)]
    pub lambda: Option<f64>,
    /// attach marks from Model I, II or III (networks only)
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// pattern CSV output
    #[arg(long)]
    pub out: PathBuf,
    /// also write the network as CSV segments
    #[arg(long)]
    pub network_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DistancesArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub pattern: PathBuf,
    /// radii at which to report disc perimeter counts, comma separated
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_NSIM)]
    pub nsim: usize,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    pub rank: usize,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// network grid; the planar grid is this divided by 1.25
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// kernel bandwidth on the network; the planar bandwidth is this divided by 1.25
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatChoice,
}

fn resolve_format(choice: Option<FormatChoice>, out: &Path) -> CurveFormat {
    choice.map(Into::into).unwrap_or_else(|| CurveFormat::from_path(out))
}

/// Maps type labels from the command line onto type indices.
fn parse_target(p: &MarkedPattern, s: &str) -> Result<Target> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Target::All);
    }
    p.require_types()?;
    if let Some(labels) = p.type_labels() {
        if let Some(k) = labels.iter().position(|l| l == s) {
            return Ok(Target::Type(k as u32 + 1));
        }
    }
    match s.parse::<u32>() {
        Ok(k) if k >= 1 && k <= p.n_types() => Ok(Target::Type(k)),
        _ => Err(Error::Config(format!("unknown type '{s}'"))),
    }
}

fn type_of(t: Target, what: &str) -> Result<u32> {
    match t {
        Target::Type(k) => Ok(k),
        Target::All => Err(Error::Config(format!("{what} needs a type, not 'all'"))),
    }
}

fn load_pattern(args: &StatArgs) -> Result<MarkedPattern> {
    let table = read_pattern_table(&args.pattern)?;
    report_rows(&args.pattern, &table);
    match &args.network {
        Some(n) => {
            let metric = Arc::new(NetworkMetric::new(Arc::new(read_network(n)?)));
            Ok(table.on_network(metric)?.0)
        }
        None => table.planar(args.window.map(|w| w.window()).transpose()?),
    }
}

fn report_rows(path: &Path, t: &PatternTable) {
    if !t.report.dropped.is_empty() {
        eprintln!(
            "{}: dropped {} row(s) without coordinates",
            path.display(),
            t.report.dropped.len()
        );
    }
    if !t.report.duplicates.is_empty() {
        eprintln!(
            "{}: {} row(s) repeat earlier coordinates",
            path.display(),
            t.report.duplicates.len()
        );
    }
}

/// A statistic fully resolved from the command line, applicable to any pattern on the
/// same support.
pub struct StatisticPlan {
    pub stat: Statistic,
    pub tf: TestFunction,
    pub from: Target,
    pub to: Target,
    pub r: Vec<f64>,
    pub bandwidth: Option<f64>,
    pub correction: Option<Correction>,
    pub intensity: IntensityChoice,
}

impl StatisticPlan {
    pub fn new(args: &StatOptions, p: &MarkedPattern) -> Result<Self> {
        let tf = TestFunction::from_str(&args.test_function)?;
        let r = match args.grid {
            Some(g) => g.values(),
            None if p.is_network() => network_stats::default_grid(p, 51)?,
            None => planar::default_grid(p.window()?, 51),
        };
        let correction = args.correction.as_deref().map(Correction::from_str).transpose()?;
        if correction.is_some() && p.is_network() {
            return Err(Error::Config("edge corrections apply to planar patterns only".into()));
        }
        Ok(Self {
            stat: args.stat,
            tf,
            from: parse_target(p, &args.from)?,
            to: parse_target(p, &args.to)?,
            r,
            bandwidth: args.bandwidth,
            correction,
            intensity: args.intensity,
        })
    }

    fn lambda(&self, p: &MarkedPattern, target: Target) -> Result<IntensitySurface> {
        match (self.intensity, p.is_network()) {
            (IntensityChoice::Homogeneous, _) => IntensitySurface::homogeneous(p, target),
            (IntensityChoice::Kernel, false) => IntensitySurface::kernel_planar(p, target, self.bandwidth),
            (IntensityChoice::Kernel, true) => {
                IntensitySurface::network(p, target, NetworkIntensityMode::LixelKernel, None, self.bandwidth)
            }
        }
    }

    pub fn evaluate(&self, p: &MarkedPattern) -> Result<SummaryCurve> {
        let r = &self.r;
        let (i, j, h) = (self.from, self.to, self.bandwidth);
        let net = p.is_network();
        let corr = match self.correction {
            Some(c) => c,
            None if net => Correction::None,
            None => Correction::default_for(p.window()?),
        };
        let lj = || self.lambda(p, j);
        let per_type = || -> Result<Vec<IntensitySurface>> {
            (1..=p.n_types()).map(|k| self.lambda(p, Target::Type(k))).collect()
        };
        use Statistic as S;
        Ok(match (self.stat, net) {
            (S::K, false) => planar::cross_k(p, i, j, &lj()?, r, corr)?,
            (S::K, true) => network_stats::cross_k(p, i, j, &lj()?, r)?,
            (S::L, false) => planar::cross_l(p, i, j, &lj()?, r, corr)?,
            (S::L, true) => return Err(Error::Config("the L-transform applies to planar patterns only".into())),
            (S::KUncorrected, true) => network_stats::cross_k_uncorrected(p, i, j, &lj()?, r)?,
            (S::KUncorrected, false) => planar::cross_k(p, i, j, &lj()?, r, Correction::None)?,
            (S::Pcf, false) => planar::cross_pcf(p, i, j, &lj()?, r, h, corr)?,
            (S::Pcf, true) => network_stats::cross_pcf(p, i, j, &lj()?, r, h)?,
            (S::H, false) => planar::cross_h(p, i, j, &lj()?, r)?,
            (S::H, true) => network_stats::cross_h(p, i, j, &lj()?, r)?,
            (S::F, false) => planar::empty_space(p, j, &lj()?, None, r)?,
            (S::F, true) => network_stats::empty_space(p, j, &lj()?, None, r)?,
            (S::J, false) => planar::cross_j(p, i, j, &lj()?, None, r)?.j,
            (S::J, true) => network_stats::cross_j(p, i, j, &lj()?, None, r)?.j,
            (S::I, false) => planar::i_function(p, &per_type()?, &self.lambda(p, Target::All)?, None, r)?,
            (S::I, true) => network_stats::i_function(p, &per_type()?, &self.lambda(p, Target::All)?, None, r)?,
            (S::MarkConnection, false) => {
                planar::mark_connection(p, type_of(i, "mark connection")?, type_of(j, "mark connection")?, r, h)?
            }
            (S::MarkConnection, true) => {
                network_stats::mark_connection(p, type_of(i, "mark connection")?, type_of(j, "mark connection")?, r, h)?
            }
            (S::MarkEquality, false) => planar::mark_equality(p, r, h)?,
            (S::MarkEquality, true) => network_stats::mark_equality(p, r, h)?,
            (S::Mingling, false) => planar::mingling(p, r)?,
            (S::Mingling, true) => network_stats::mingling(p, r)?,
            (S::Markcorr, false) => planar::tf_correlation(p, self.tf, r, h)?,
            (S::Markcorr, true) => network_stats::tf_correlation(p, self.tf, r, h)?,
            (S::MarkWeightedK | S::MarkWeightedKRatio, _) => {
                let lambda = match self.intensity {
                    IntensityChoice::Homogeneous => None,
                    IntensityChoice::Kernel => Some(self.lambda(p, Target::All)?),
                };
                let w = if net {
                    network_stats::mark_weighted_k(p, self.tf, lambda.as_ref(), r, h)?
                } else {
                    planar::mark_weighted_k(p, self.tf, lambda.as_ref(), r, corr, h)?
                };
                if self.stat == S::MarkWeightedK {
                    w.weighted
                } else {
                    w.ratio
                }
            }
            (S::U, false) => planar::u_statistic(p, self.tf, r, h)?,
            (S::U, true) => network_stats::u_statistic(p, self.tf, r, h)?,
            (S::Bivariate, false) => planar::bivariate_mark_correlation(p, r, h)?,
            (S::Bivariate, true) => network_stats::bivariate_mark_correlation(p, r, h)?,
        })
    }
}

fn summarize(args: &SummarizeArgs) -> Result<()> {
    let p = load_pattern(&args.stat)?;
    let plan = StatisticPlan::new(&args.stat.options, &p)?;
    let curve = plan.evaluate(&p)?;
    write_curve(
        &CurveTable::from(&curve),
        &args.out,
        resolve_format(args.format, &args.out),
    )
}

/// Uniform relocation of all points, keeping count, order, types and marks.
pub fn csr_replicate(p: &MarkedPattern, rng: &mut ChaCha8Rng) -> Result<MarkedPattern> {
    let base = if p.is_network() {
        let metric = p.metric()?.clone();
        let locs = uniform_locations(metric.network(), p.n(), rng);
        MarkedPattern::on_network(metric, locs)?
    } else {
        binomial_planar(p.window()?, p.n(), rng)
    };
    let mut out = base;
    if let Some(t) = p.types() {
        out = out.with_types(t.to_vec())?;
        if let Some(l) = p.type_labels() {
            out = out.with_type_labels(l.to_vec());
        }
    }
    if let Some(m) = p.marks() {
        out = out.with_marks(m.to_vec())?;
    }
    if let Some(m) = p.second_marks() {
        out = out.with_second_marks(m.to_vec())?;
    }
    Ok(out)
}

fn envelope(args: &EnvelopeArgs) -> Result<()> {
    let p = load_pattern(&args.stat)?;
    let plan = StatisticPlan::new(&args.stat.options, &p)?;
    let stat = |q: &MarkedPattern| plan.evaluate(q);
    let env = match args.null {
        NullChoice::Labeling => random_labeling_envelope(&p, stat, args.nsim, args.rank, args.seed)?,
        NullChoice::Csr => pointwise_envelope(
            &p,
            stat,
            |rng: &mut ChaCha8Rng| csr_replicate(&p, rng),
            args.nsim,
            args.rank,
            args.seed,
        )?,
    };
    write_curve(
        &CurveTable::from(&env),
        &args.out,
        resolve_format(args.format, &args.out),
    )
}

fn parse_dendrite(s: &str) -> Result<(usize, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("dendrite '{s}' is not depth:branch_angle:length_decay"));
    match parts.as_slice() {
        [d, a, l] => Ok((
            d.parse().map_err(|_| bad())?,
            a.parse().map_err(|_| bad())?,
            l.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut rng = RngSpec::new(args.seed, 0).rng();
    let fixed = match (args.n, args.lambda) {
        (Some(n), _) => Some(n),
        (None, Some(l)) if l >= 0.0 && l.is_finite() => None,
        (None, Some(l)) => return Err(Error::Config(format!("intensity must be non-negative, got {l}"))),
        (None, None) => return Err(Error::Config("give --n or --lambda".into())),
    };
    let network: Option<LinearNetwork> = match (&args.network, &args.dendrite) {
        (Some(path), _) => Some(read_network(path)?),
        (None, Some(spec)) => {
            let (depth, angle, decay) = parse_dendrite(spec)?;
            let mut net_rng = RngSpec::new(args.seed, u64::MAX).rng();
            let raw = dendrite_like_network(depth, angle, decay, &mut net_rng)?;
            Some(match args.diameter {
                Some(d) if d > 0.0 && d.is_finite() => {
                    let current = NetworkMetric::new(Arc::new(raw.clone())).vertex_diameter();
                    raw.transformed(d / current, [0.0, 0.0])?
                }
                Some(d) => return Err(Error::Config(format!("diameter must be positive, got {d}"))),
                None => raw,
            })
        }
        (None, None) => None,
    };
    let pattern = match network {
        Some(net) => {
            let net = Arc::new(net);
            if let Some(path) = &args.network_out {
                write_network_csv(&net, path)?;
            }
            let metric = Arc::new(NetworkMetric::new(net.clone()));
            let p = match fixed {
                Some(n) => uniform_on_network(&metric, n, &mut rng),
                None => poisson_on_network(&metric, args.lambda.unwrap_or(0.0), &mut rng),
            };
            match &args.model {
                Some(m) => mark_model(&p, MarkModel::from_str(m)?, Default::default())?,
                None => p,
            }
        }
        None => {
            if args.model.is_some() {
                return Err(Error::Config("mark models need a network".into()));
            }
            let window = match args.window {
                Some(w) => w.window()?,
                None => Window::unit_square(),
            };
            match fixed {
                Some(n) => binomial_planar(&window, n, &mut rng),
                None => poisson_planar(&window, args.lambda.unwrap_or(0.0), &mut rng),
            }
        }
    };
    write_pattern_csv(&pattern, &args.out)
}

#[derive(Serialize)]
struct DistanceDump {
    n: usize,
    distances: Vec<Vec<Option<f64>>>,
    radii: Vec<f64>,
    /// `perimeter_counts[i][k]`: perimeter count of the disc around point i at `radii[k]`
    perimeter_counts: Vec<Vec<usize>>,
}

fn distances(args: &DistancesArgs) -> Result<()> {
    let metric = Arc::new(NetworkMetric::new(Arc::new(read_network(&args.network)?)));
    let table = read_pattern_table(&args.pattern)?;
    report_rows(&args.pattern, &table);
    let (p, _) = table.on_network(metric)?;
    let engine = p.metric_engine()?;
    let m = engine.pairwise_distances();
    let n = p.n();
    for &r in &args.radii {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveRadius(r));
        }
    }
    let counts = (0..n)
        .map(|i| {
            args.radii
                .iter()
                .map(|&r| engine.disc_perimeter_count(i, r))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    match resolve_format(args.format, &args.out) {
        CurveFormat::Json => write_json(
            &DistanceDump {
                n,
                distances: (0..n)
                    .map(|i| m.row(i).iter().map(|d| d.is_finite().then_some(*d)).collect())
                    .collect(),
                radii: args.radii.clone(),
                perimeter_counts: counts,
            },
            &args.out,
        ),
        CurveFormat::Csv => {
            use std::io::Write;
            let mut w = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
            writeln!(w, "i,j,distance")?;
            for i in 0..n {
                for j in 0..n {
                    let d = m.get(i, j);
                    if d.is_finite() {
                        writeln!(w, "{i},{j},{d}")?;
                    } else {
                        writeln!(w, "{i},{j},")?;
                    }
                }
            }
            w.flush()?;
            if !args.radii.is_empty() {
                let path = args.out.with_extension("counts.csv");
                let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
                writeln!(w, "i,r,count")?;
                for (i, row) in counts.iter().enumerate() {
                    for (r, c) in args.radii.iter().zip(row) {
                        writeln!(w, "{i},{r},{c}")?;
                    }
                }
                w.flush()?;
            }
            Ok(())
        }
    }
}

fn repro(args: &ReproArgs) -> Result<()> {
    let mut config = StudyConfig {
        seed: args.seed,
        n_sim: args.nsim,
        rank: args.rank,
        n_points: args.points,
        ..StudyConfig::default()
    };
    if let Some(g) = args.grid {
        if g.min != 0.0 {
            return Err(Error::Config("the study grid must start at 0".into()));
        }
        config.network_r_max = g.max;
        config.grid_count = g.count;
    }
    if let Some(h) = args.bandwidth {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::NonPositiveBandwidth(h));
        }
        config.bandwidth_network = Some(h);
        config.bandwidth_planar = Some(h / config.ratio);
    }
    let format: CurveFormat = args.format.into();
    let result = run_study(&config)?;
    let report = write_outputs(&result, &args.out, format)?;
    for c in &report.checks {
        eprintln!("{} {} ({})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}

/// Exit status for an error: 2 for invalid input or configuration, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::MissingColumn { .. }
        | Error::UnsortedGrid
        | Error::InvalidEnvelope { .. }
        | Error::NonPositiveBandwidth(_)
        | Error::NonPositiveRadius(_)
        | Error::UnsupportedCorrection(_)
        | Error::UnsupportedTestFunction(_) => 2,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Summarize(a) => summarize(a),
        Command::Envelope(a) => envelope(a),
        Command::Simulate(a) => simulate(a),
        Command::Distances(a) => distances(a),
        Command::Repro(a) => repro(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
