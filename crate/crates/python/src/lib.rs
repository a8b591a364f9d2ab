use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use linmark::cli::{csr_replicate, exit_code, GridSpec, StatOptions, Statistic, StatisticPlan};
use linmark::envelope::{pointwise_envelope, random_labeling_envelope};
use linmark::io::{network_from_polylines, read_network, read_pattern_table, CurveFormat, CurveTable};
use linmark::repro::{qualitative_checks, run_study, write_outputs, StudyConfig};
use linmark::simulate::{dendrite_like_network, poisson_on_network, uniform_on_network};
use linmark::{EnvelopeResult, Error, LinearNetwork, MarkedPattern, NetworkMetric, RngSpec, SummaryCurve, Window};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    if exit_code(&e) == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn window_of(w: (f64, f64, f64, f64)) -> PyResult<Window> {
    Window::rectangle(w.0, w.1, w.2, w.3).map_err(py_err)
}

/// A linear network: straight segments joined at shared endpoints.
#[pyclass(module = "pylinmark", frozen)]
pub struct Network {
    metric: Arc<NetworkMetric>,
}

impl Network {
    fn wrap(net: LinearNetwork) -> Self {
        Self {
            metric: Arc::new(NetworkMetric::new(Arc::new(net))),
        }
    }
}

#[pymethods]
impl Network {
    /// Segments given as `(x1, y1, x2, y2)`; endpoints closer than `tol` are merged.
    #[new]
    #[pyo3(signature = (segments, tol=None))]
    fn new(segments: Vec<(f64, f64, f64, f64)>, tol: Option<f64>) -> PyResult<Self> {
        let lines = segments.into_iter().map(|(a, b, c, d)| vec![[a, b], [c, d]]).collect();
        Ok(Self::wrap(network_from_polylines(lines, tol).map_err(py_err)?))
    }

    /// Reads a segment CSV (`x1,y1,x2,y2`) or a GeoJSON file.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(Self::wrap(read_network(path).map_err(py_err)?))
    }

    /// Random binary tree with `2^depth - 1` branches, rescaled to the given shortest-path diameter.
    #[staticmethod]
    #[pyo3(signature = (depth=6, branch_angle=1.0, length_decay=0.65, diameter=500.0, seed=7))]
    fn dendrite(depth: usize, branch_angle: f64, length_decay: f64, diameter: f64, seed: u64) -> PyResult<Self> {
        let mut rng = RngSpec::new(seed, 0).rng();
        let raw = dendrite_like_network(depth, branch_angle, length_decay, &mut rng).map_err(py_err)?;
        let factor = diameter / NetworkMetric::new(Arc::new(raw.clone())).vertex_diameter();
        let (x0, _, y0, _) = raw.bounding_box();
        Ok(Self::wrap(
            raw.transformed(factor, [-x0 * factor, -y0 * factor]).map_err(py_err)?,
        ))
    }

    #[getter]
    fn length(&self) -> f64 {
        self.metric.network().total_length()
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.metric.network().n_vertices()
    }

    #[getter]
    fn n_segments(&self) -> usize {
        self.metric.network().n_segments()
    }

    fn segments(&self) -> Vec<(f64, f64, f64, f64)> {
        let net = self.metric.network();
        let v = net.vertices();
        net.segments()
            .iter()
            .map(|&(a, b)| (v[a][0], v[a][1], v[b][0], v[b][1]))
            .collect()
    }

    /// Shortest-path distance matrix between points snapped onto the network.
    fn distances(&self, coords: Vec<(f64, f64)>) -> Vec<Vec<f64>> {
        let net = self.metric.network();
        let locs: Vec<_> = coords.iter().map(|&(x, y)| net.snap([x, y])).collect();
        locs.iter()
            .map(|&a| locs.iter().map(|&b| self.metric.distance(a, b)).collect())
            .collect()
    }

    /// Number of network points at exact distance `r` from the snapped `point`.
    fn perimeter_count(&self, point: (f64, f64), r: f64) -> PyResult<usize> {
        let loc = self.metric.network().snap([point.0, point.1]);
        self.metric.perimeter_count(loc, r).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(vertices={}, segments={}, length={:.6})",
            self.n_vertices(),
            self.n_segments(),
            self.length()
        )
    }
}

/// A planar or network point pattern with optional types and real marks.
#[pyclass(module = "pylinmark", frozen)]
pub struct Pattern {
    inner: MarkedPattern,
}

fn decorate(
    mut p: MarkedPattern,
    types: Option<Vec<u32>>,
    marks: Option<Vec<f64>>,
    second_marks: Option<Vec<f64>>,
) -> PyResult<MarkedPattern> {
    if let Some(t) = types {
        p = p.with_types(t).map_err(py_err)?;
    }
    if let Some(m) = marks {
        p = p.with_marks(m).map_err(py_err)?;
    }
    if let Some(m) = second_marks {
        p = p.with_second_marks(m).map_err(py_err)?;
    }
    Ok(p)
}

#[pymethods]
impl Pattern {
    /// Points in the rectangle `window = (xmin, xmax, ymin, ymax)`.
    #[staticmethod]
    #[pyo3(signature = (coords, window, types=None, marks=None, second_marks=None))]
    fn planar(
        coords: Vec<(f64, f64)>,
        window: (f64, f64, f64, f64),
        types: Option<Vec<u32>>,
        marks: Option<Vec<f64>>,
        second_marks: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let pts = coords.into_iter().map(|(x, y)| [x, y]).collect();
        let p = MarkedPattern::planar(window_of(window)?, pts).map_err(py_err)?;
        Ok(Self {
            inner: decorate(p, types, marks, second_marks)?,
        })
    }

    /// Points snapped onto the nearest location of `network`.
    #[staticmethod]
    #[pyo3(signature = (network, coords, types=None, marks=None, second_marks=None))]
    fn on_network(
        network: &Network,
        coords: Vec<(f64, f64)>,
        types: Option<Vec<u32>>,
        marks: Option<Vec<f64>>,
        second_marks: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let net = network.metric.network();
        let locs = coords.iter().map(|&(x, y)| net.snap([x, y])).collect();
        let p = MarkedPattern::on_network(network.metric.clone(), locs).map_err(py_err)?;
        Ok(Self {
            inner: decorate(p, types, marks, second_marks)?,
        })
    }

    /// Reads a pattern CSV; with a network the points are snapped onto it, otherwise the
    /// window defaults to the bounding box of the points.
    #[staticmethod]
    #[pyo3(signature = (path, network=None, window=None))]
    fn read(path: PathBuf, network: Option<&Network>, window: Option<(f64, f64, f64, f64)>) -> PyResult<Self> {
        let table = read_pattern_table(path).map_err(py_err)?;
        let inner = match network {
            Some(n) => table.on_network(n.metric.clone()).map_err(py_err)?.0,
            None => table.planar(window.map(window_of).transpose()?).map_err(py_err)?,
        };
        Ok(Self { inner })
    }

    /// Homogeneous Poisson pattern with intensity `lam` per unit length.
    #[staticmethod]
    #[pyo3(signature = (network, lam, seed=1))]
    fn poisson(network: &Network, lam: f64, seed: u64) -> PyResult<Self> {
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(PyValueError::new_err("intensity must be positive"));
        }
        let inner = poisson_on_network(&network.metric, lam, &mut RngSpec::new(seed, 0).rng());
        Ok(Self { inner })
    }

    /// `n` independent uniform points on the network.
    #[staticmethod]
    #[pyo3(signature = (network, n, seed=1))]
    fn uniform(network: &Network, n: usize, seed: u64) -> Self {
        Self {
            inner: uniform_on_network(&network.metric, n, &mut RngSpec::new(seed, 0).rng()),
        }
    }

    /// Same locations with new real marks.
    fn with_marks(&self, marks: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_replaced_marks(marks).map_err(py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn is_network(&self) -> bool {
        self.inner.is_network()
    }

    #[getter]
    fn coords(&self) -> Vec<(f64, f64)> {
        self.inner.coords().iter().map(|p| (p[0], p[1])).collect()
    }

    #[getter]
    fn types(&self) -> Option<Vec<u32>> {
        self.inner.types().map(<[u32]>::to_vec)
    }

    #[getter]
    fn marks(&self) -> Option<Vec<f64>> {
        self.inner.marks().map(<[f64]>::to_vec)
    }

    fn __repr__(&self) -> String {
        let kind = if self.inner.is_network() { "network" } else { "planar" };
        format!("Pattern({kind}, n={})", self.inner.n())
    }
}

/// An estimated curve; masked grid points are NaN. Envelope bands are present for
/// envelope results only.
#[pyclass(module = "pylinmark", frozen)]
pub struct Curve {
    #[pyo3(get)]
    label: String,
    #[pyo3(get)]
    r: Vec<f64>,
    #[pyo3(get)]
    value: Vec<f64>,
    #[pyo3(get)]
    theo: Vec<f64>,
    #[pyo3(get)]
    lo: Option<Vec<f64>>,
    #[pyo3(get)]
    hi: Option<Vec<f64>>,
    #[pyo3(get)]
    mean: Option<Vec<f64>>,
    #[pyo3(get)]
    exceed_fraction: Option<f64>,
}

impl From<SummaryCurve> for Curve {
    fn from(c: SummaryCurve) -> Self {
        Self {
            label: c.label,
            r: c.r,
            value: c.values,
            theo: c.theo,
            lo: None,
            hi: None,
            mean: None,
            exceed_fraction: None,
        }
    }
}

impl From<EnvelopeResult> for Curve {
    fn from(e: EnvelopeResult) -> Self {
        Self {
            label: e.label,
            r: e.r,
            value: e.observed,
            theo: e.theo,
            lo: Some(e.lo),
            hi: Some(e.hi),
            mean: Some(e.mean),
            exceed_fraction: Some(e.exceed_fraction),
        }
    }
}

#[pymethods]
impl Curve {
    /// Writes the curve as CSV or JSON, chosen by the file extension.
    fn write(&self, path: PathBuf) -> PyResult<()> {
        let table = CurveTable {
            label: self.label.clone(),
            r: self.r.clone(),
            value: self.value.clone(),
            theo: self.theo.clone(),
            envelope: match (&self.lo, &self.hi, &self.mean) {
                (Some(lo), Some(hi), Some(mean)) => Some(linmark::io::Bands {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    mean: mean.clone(),
                }),
                _ => None,
            },
            meta: Default::default(),
        };
        linmark::io::write_curve(&table, &path, CurveFormat::from_path(&path)).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.r.len()
    }

    fn __repr__(&self) -> String {
        format!("Curve({}, {} points)", self.label, self.r.len())
    }
}

#[allow(clippy::too_many_arguments)]
fn plan(
    pattern: &MarkedPattern,
    stat: &str,
    r: Option<Vec<f64>>,
    tf: &str,
    i: &str,
    j: &str,
    bandwidth: Option<f64>,
    correction: Option<String>,
    intensity: &str,
) -> PyResult<StatisticPlan> {
    let mut opts = StatOptions::new(Statistic::from_str(stat).map_err(py_err)?);
    opts.test_function = tf.to_string();
    opts.from = i.to_string();
    opts.to = j.to_string();
    opts.bandwidth = bandwidth;
    opts.correction = correction;
    opts.intensity = intensity.parse().map_err(py_err)?;
    if let Some(r) = &r {
        if r.len() < 2 {
            return Err(PyValueError::new_err("the distance grid needs at least two points"));
        }
        opts.grid = Some(GridSpec {
            min: r[0],
            max: r[r.len() - 1],
            count: r.len(),
        });
    }
    let mut plan = StatisticPlan::new(&opts, pattern).map_err(py_err)?;
    if let Some(r) = r {
        linmark::curve::check_grid(&r).map_err(py_err)?;
        plan.r = r;
    }
    Ok(plan)
}

/// Evaluates a summary statistic (`k`, `pcf`, `h`, `f`, `j`, `i`, `markcorr`, ...).
#[pyfunction]
#[pyo3(signature = (pattern, stat, r=None, tf="stoyan", i="all", j="all", bandwidth=None, correction=None, intensity="homogeneous"))]
#[allow(clippy::too_many_arguments)]
fn summarize(
    py: Python<'_>,
    pattern: &Pattern,
    stat: &str,
    r: Option<Vec<f64>>,
    tf: &str,
    i: &str,
    j: &str,
    bandwidth: Option<f64>,
    correction: Option<String>,
    intensity: &str,
) -> PyResult<Curve> {
    let plan = plan(&pattern.inner, stat, r, tf, i, j, bandwidth, correction, intensity)?;
    let p = &pattern.inner;
    py.detach(|| plan.evaluate(p)).map(Curve::from).map_err(py_err)
}

/// Pointwise Monte-Carlo envelope under random labelling (`null="labeling"`) or uniform
/// relocation (`null="csr"`).
#[pyfunction]
#[pyo3(signature = (pattern, stat, nsim=199, rank=5, seed=1, null="labeling", r=None, tf="stoyan", i="all", j="all", bandwidth=None, correction=None, intensity="homogeneous"))]
#[allow(clippy::too_many_arguments)]
fn envelope(
    py: Python<'_>,
    pattern: &Pattern,
    stat: &str,
    nsim: usize,
    rank: usize,
    seed: u64,
    null: &str,
    r: Option<Vec<f64>>,
    tf: &str,
    i: &str,
    j: &str,
    bandwidth: Option<f64>,
    correction: Option<String>,
    intensity: &str,
) -> PyResult<Curve> {
    let plan = plan(&pattern.inner, stat, r, tf, i, j, bandwidth, correction, intensity)?;
    let p = &pattern.inner;
    let stat = |q: &MarkedPattern| plan.evaluate(q);
    let env = match null {
        "labeling" | "labelling" => py.detach(|| random_labeling_envelope(p, stat, nsim, rank, seed)),
        "csr" => py.detach(|| pointwise_envelope(p, stat, |rng: &mut _| csr_replicate(p, rng), nsim, rank, seed)),
        other => return Err(PyValueError::new_err(format!("unknown null model '{other}'"))),
    };
    env.map(Curve::from).map_err(py_err)
}

/// Runs the mark-model simulation study. Returns the qualitative checks as
/// `(name, passed, detail)` and writes the curves to `out` when given.
#[pyfunction]
#[pyo3(signature = (seed=7, nsim=199, rank=5, points=100, out=None))]
fn repro(
    py: Python<'_>,
    seed: u64,
    nsim: usize,
    rank: usize,
    points: usize,
    out: Option<PathBuf>,
) -> PyResult<Vec<(String, bool, String)>> {
    let config = StudyConfig {
        seed,
        n_sim: nsim,
        rank,
        n_points: points,
        ..StudyConfig::default()
    };
    let result = py.detach(|| run_study(&config)).map_err(py_err)?;
    if let Some(dir) = out {
        write_outputs(&result, &dir, CurveFormat::Csv).map_err(py_err)?;
    }
    Ok(qualitative_checks(&result)
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect())
}

#[pymodule]
fn pylinmark(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_class::<Pattern>()?;
    m.add_class::<Curve>()?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(envelope, m)?)?;
    m.add_function(wrap_pyfunction!(repro, m)?)?;
    Ok(())
}
