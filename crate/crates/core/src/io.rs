//! Pattern, network and curve files.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::{check_grid, masked_vec, SummaryCurve};
use crate::envelope::EnvelopeResult;
use crate::error::{Error, Result};
use crate::metric::NetworkMetric;
use crate::network::{LinearNetwork, NetworkLocation, Point};
use crate::pattern::MarkedPattern;
use crate::window::Window;

/// What happened to the rows of a pattern file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadReport {
    pub rows: usize,
    /// `(line, reason)` for rows that were skipped
    pub dropped: Vec<(usize, String)>,
    /// lines whose coordinates repeat an earlier row; these rows are kept
    pub duplicates: Vec<usize>,
    /// original type label for each type index `1..=k`
    pub type_mapping: Vec<String>,
}

/// Point records read from a CSV file, not yet attached to a window or network.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable {
    pub coords: Vec<Point>,
    pub types: Option<Vec<u32>>,
    pub type_labels: Option<Vec<String>>,
    pub marks: Option<Vec<f64>>,
    pub second_marks: Option<Vec<f64>>,
    pub report: ReadReport,
}

impl PatternTable {
    fn decorate(&self, mut p: MarkedPattern) -> Result<MarkedPattern> {
        if let Some(t) = &self.types {
            p = p.with_types(t.clone())?;
            if let Some(l) = &self.type_labels {
                p = p.with_type_labels(l.clone());
            }
        }
        if let Some(m) = &self.marks {
            p = p.with_marks(m.clone())?;
        }
        if let Some(m) = &self.second_marks {
            p = p.with_second_marks(m.clone())?;
        }
        Ok(p)
    }

    /// Planar pattern in `window`, or in the bounding box of the points when `None`.
    pub fn planar(&self, window: Option<Window>) -> Result<MarkedPattern> {
        let window = match window {
            Some(w) => w,
            None => Window::bounding(&self.coords, 0.0)?,
        };
        self.decorate(MarkedPattern::planar(window, self.coords.clone())?)
    }

    /// Snaps every point to its nearest network location. Returns the pattern and the
    /// largest snap displacement.
    pub fn on_network(&self, metric: Arc<NetworkMetric>) -> Result<(MarkedPattern, f64)> {
        let net = metric.network().clone();
        let mut worst: f64 = 0.0;
        let locs: Vec<NetworkLocation> = self
            .coords
            .iter()
            .map(|&c| {
                let (loc, d) = net.snap_with_distance(c);
                worst = worst.max(d);
                loc
            })
            .collect();
        let p = self.decorate(MarkedPattern::on_network(metric, locs)?)?;
        Ok((p, worst))
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => open_err(path, io),
        kind => parse_err(path, line, format!("{kind:?}")),
    }
}

fn open_err(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

fn required(path: &Path, headers: &csv::StringRecord, name: &str) -> Result<usize> {
    column(headers, &[name]).ok_or_else(|| Error::MissingColumn {
        path: path.to_path_buf(),
        column: name.to_string(),
    })
}

fn number(path: &Path, line: usize, name: &str, cell: &str) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("{name}: '{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("{name}: '{cell}' is not finite")));
    }
    Ok(v)
}

/// Maps labels to `1..=k`: numerically when every label is an integer, otherwise
/// lexicographically.
fn map_labels(labels: &[String]) -> (Vec<u32>, Vec<String>) {
    let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
    let mut order: Vec<&str> = distinct.into_iter().collect();
    if order.iter().all(|l| l.parse::<i64>().is_ok()) {
        order.sort_by_key(|l| l.parse::<i64>().unwrap());
    }
    let index: HashMap<&str, u32> = order.iter().enumerate().map(|(i, &l)| (l, i as u32 + 1)).collect();
    (
        labels.iter().map(|l| index[l.as_str()]).collect(),
        order.into_iter().map(String::from).collect(),
    )
}

/// Reads `x,y[,type][,mark1][,mark2]` (header required, columns in any order).
///
/// Rows with an empty coordinate cell are dropped and reported; rows repeating earlier
/// coordinates are reported but kept.
pub fn read_pattern_table(path: impl AsRef<Path>) -> Result<PatternTable> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let ix = required(path, &headers, "x")?;
    let iy = required(path, &headers, "y")?;
    let it = column(&headers, &["type"]);
    let im1 = column(&headers, &["mark1", "mark"]);
    let im2 = column(&headers, &["mark2"]);

    let mut report = ReadReport::default();
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut m1 = Vec::new();
    let mut m2 = Vec::new();
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        report.rows += 1;
        let cell = |i: usize| rec.get(i).unwrap_or("");
        if cell(ix).is_empty() || cell(iy).is_empty() {
            report.dropped.push((line, "missing coordinate".into()));
            continue;
        }
        let p = [number(path, line, "x", cell(ix))?, number(path, line, "y", cell(iy))?];
        if let Some(i) = it {
            if cell(i).is_empty() {
                return Err(parse_err(path, line, "type: empty cell"));
            }
            labels.push(cell(i).to_string());
        }
        if let Some(i) = im1 {
            m1.push(number(path, line, "mark1", cell(i))?);
        }
        if let Some(i) = im2 {
            m2.push(number(path, line, "mark2", cell(i))?);
        }
        let key = ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits());
        if seen.insert(key, line).is_some() {
            report.duplicates.push(line);
        }
        coords.push(p);
    }
    let (types, type_labels) = if it.is_some() {
        let (t, l) = map_labels(&labels);
        report.type_mapping = l.clone();
        (Some(t), Some(l))
    } else {
        (None, None)
    };
    Ok(PatternTable {
        coords,
        types,
        type_labels,
        marks: im1.map(|_| m1),
        second_marks: im2.map(|_| m2),
        report,
    })
}

/// Reads a planar pattern; the window is the bounding box of the points.
pub fn read_pattern_csv(path: impl AsRef<Path>) -> Result<(MarkedPattern, ReadReport)> {
    let table = read_pattern_table(path)?;
    let p = table.planar(None)?;
    Ok((p, table.report))
}

/// Snaps coordinates to shared vertices: points closer than `tol` become one vertex.
struct VertexSnapper {
    tol: f64,
    vertices: Vec<Point>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl VertexSnapper {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            vertices: Vec::new(),
            cells: HashMap::new(),
        }
    }

    fn cell(&self, p: Point) -> (i64, i64) {
        ((p[0] / self.tol).floor() as i64, (p[1] / self.tol).floor() as i64)
    }

    fn insert(&mut self, p: Point) -> usize {
        let (cx, cy) = self.cell(p);
        let mut best: Option<(usize, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for &v in self.cells.get(&(cx + dx, cy + dy)).into_iter().flatten() {
                    let d = crate::network::euclidean(self.vertices[v], p);
                    if d <= self.tol && best.is_none_or(|(bv, bd)| d < bd || (d == bd && v < bv)) {
                        best = Some((v, d));
                    }
                }
            }
        }
        if let Some((v, _)) = best {
            return v;
        }
        self.vertices.push(p);
        let v = self.vertices.len() - 1;
        self.cells.entry((cx, cy)).or_default().push(v);
        v
    }
}

fn assemble_network(polylines: Vec<Vec<Point>>, tol: Option<f64>) -> Result<LinearNetwork> {
    let all: Vec<Point> = polylines.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let tol = tol.unwrap_or_else(|| {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &all {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        1e-9 * (x1 - x0).hypot(y1 - y0).max(1.0)
    });
    let mut snap = VertexSnapper::new(tol);
    let mut segments = Vec::new();
    let mut known = BTreeSet::new();
    for line in polylines {
        let ids: Vec<usize> = line.iter().map(|&p| snap.insert(p)).collect();
        for w in ids.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a != b && known.insert((a.min(b), a.max(b))) {
                segments.push((a, b));
            }
        }
    }
    LinearNetwork::new(snap.vertices, segments)
}

/// Builds a network from polylines, merging endpoints closer than `tol` (default `1e-9`
/// times the bounding-box diagonal) and dropping repeated or degenerate segments.
pub fn network_from_polylines(polylines: Vec<Vec<Point>>, tol: Option<f64>) -> Result<LinearNetwork> {
    assemble_network(polylines, tol)
}

/// Network file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    /// header `x1,y1,x2,y2`, one segment per row
    Csv,
    /// FeatureCollection of LineString or MultiLineString features
    GeoJson,
}

impl NetworkFormat {
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("json" | "geojson") => NetworkFormat::GeoJson,
            _ => NetworkFormat::Csv,
        }
    }
}

/// Reads a network, format chosen by file extension, with the default snap tolerance of
/// `1e-9` times the bounding-box diagonal.
pub fn read_network(path: impl AsRef<Path>) -> Result<LinearNetwork> {
    let path = path.as_ref();
    read_network_with(path, NetworkFormat::from_path(path), None)
}

pub fn read_network_with(path: impl AsRef<Path>, format: NetworkFormat, tol: Option<f64>) -> Result<LinearNetwork> {
    let path = path.as_ref();
    let lines = match format {
        NetworkFormat::Csv => segment_rows(path)?,
        NetworkFormat::GeoJson => {
            let text = std::fs::read_to_string(path).map_err(|e| open_err(path, e))?;
            geojson_lines(path, &text)?
        }
    };
    assemble_network(lines, tol)
}

fn segment_rows(path: &Path) -> Result<Vec<Vec<Point>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let cols = ["x1", "y1", "x2", "y2"]
        .iter()
        .map(|c| required(path, &headers, c))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let v = cols
            .iter()
            .zip(["x1", "y1", "x2", "y2"])
            .map(|(&i, name)| number(path, line, name, rec.get(i).unwrap_or("")))
            .collect::<Result<Vec<_>>>()?;
        out.push(vec![[v[0], v[1]], [v[2], v[3]]]);
    }
    Ok(out)
}

fn geojson_lines(path: &Path, text: &str) -> Result<Vec<Vec<Point>>> {
    let root: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_err(path, e.line(), e.to_string()))?;
    let bad = |msg: String| parse_err(path, 0, msg);
    let features: Vec<&serde_json::Value> = match root.get("type").and_then(|t| t.as_str()) {
        Some("FeatureCollection") => root
            .get("features")
            .and_then(|f| f.as_array())
            .ok_or_else(|| bad("FeatureCollection without features".into()))?
            .iter()
            .collect(),
        Some("Feature") => vec![&root],
        other => return Err(bad(format!("expected a FeatureCollection, got {other:?}"))),
    };
    let position = |v: &serde_json::Value, k: usize| -> Result<Point> {
        let a = v.as_array().filter(|a| a.len() >= 2);
        let xy = a.and_then(|a| Some([a[0].as_f64()?, a[1].as_f64()?]));
        xy.filter(|p| p[0].is_finite() && p[1].is_finite())
            .ok_or_else(|| bad(format!("feature {k}: invalid position {v}")))
    };
    let line = |v: &serde_json::Value, k: usize| -> Result<Vec<Point>> {
        v.as_array()
            .ok_or_else(|| bad(format!("feature {k}: coordinates must be an array")))?
            .iter()
            .map(|p| position(p, k))
            .collect()
    };
    let mut out = Vec::new();
    for (k, f) in features.iter().enumerate() {
        let geom = f
            .get("geometry")
            .ok_or_else(|| bad(format!("feature {k}: no geometry")))?;
        let coords = geom
            .get("coordinates")
            .ok_or_else(|| bad(format!("feature {k}: no coordinates")))?;
        match geom.get("type").and_then(|t| t.as_str()) {
            Some("LineString") => out.push(line(coords, k)?),
            Some("MultiLineString") => {
                for part in coords
                    .as_array()
                    .ok_or_else(|| bad(format!("feature {k}: bad MultiLineString")))?
                {
                    out.push(line(part, k)?);
                }
            }
            other => return Err(bad(format!("feature {k}: unsupported geometry {other:?}"))),
        }
    }
    Ok(out)
}

/// Writes a network as `x1,y1,x2,y2` rows.
pub fn write_network_csv(net: &LinearNetwork, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x1,y1,x2,y2")?;
    for &(a, b) in net.segments() {
        let (p, q) = (net.vertices()[a], net.vertices()[b]);
        writeln!(w, "{},{},{},{}", p[0], p[1], q[0], q[1])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a pattern as `x,y[,type][,mark1][,mark2]`, type written as its label when known.
pub fn write_pattern_csv(p: &MarkedPattern, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut header = vec!["x", "y"];
    if p.types().is_some() {
        header.push("type");
    }
    if p.marks().is_some() {
        header.push("mark1");
    }
    if p.second_marks().is_some() {
        header.push("mark2");
    }
    writeln!(w, "{}", header.join(","))?;
    for (i, c) in p.coords().iter().enumerate() {
        write!(w, "{},{}", c[0], c[1])?;
        if let Some(t) = p.types() {
            match p.type_labels() {
                Some(l) => write!(w, ",{}", l[t[i] as usize - 1])?,
                None => write!(w, ",{}", t[i])?,
            }
        }
        if let Some(m) = p.marks() {
            write!(w, ",{}", m[i])?;
        }
        if let Some(m) = p.second_marks() {
            write!(w, ",{}", m[i])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurveFormat {
    #[default]
    Csv,
    Json,
}

impl CurveFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => CurveFormat::Json,
            _ => CurveFormat::Csv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            CurveFormat::Csv => "csv",
            CurveFormat::Json => "json",
        }
    }
}

impl fmt::Display for CurveFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for CurveFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CurveFormat::Csv),
            "json" => Ok(CurveFormat::Json),
            _ => Err(Error::Config(format!("unknown output format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bands {
    #[serde(with = "masked_vec")]
    pub lo: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub hi: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub mean: Vec<f64>,
}

/// The tabular view of a curve or an envelope that is written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub label: String,
    pub r: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub value: Vec<f64>,
    #[serde(with = "masked_vec")]
    pub theo: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Bands>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

impl From<&SummaryCurve> for CurveTable {
    fn from(c: &SummaryCurve) -> Self {
        Self {
            label: c.label.clone(),
            r: c.r.clone(),
            value: c.values.clone(),
            theo: c.theo.clone(),
            envelope: None,
            meta: c.meta.clone(),
        }
    }
}

impl From<&EnvelopeResult> for CurveTable {
    fn from(e: &EnvelopeResult) -> Self {
        let mut meta = BTreeMap::new();
        meta.insert("n_sim".into(), e.n_sim.to_string());
        meta.insert("rank".into(), e.rank.to_string());
        meta.insert("exceed_fraction".into(), e.exceed_fraction.to_string());
        Self {
            label: e.label.clone(),
            r: e.r.clone(),
            value: e.observed.clone(),
            theo: e.theo.clone(),
            envelope: Some(Bands {
                lo: e.lo.clone(),
                hi: e.hi.clone(),
                mean: e.mean.clone(),
            }),
            meta,
        }
    }
}

impl CurveTable {
    pub fn to_curve(&self) -> SummaryCurve {
        let mut c = SummaryCurve::new(
            self.label.clone(),
            self.r.clone(),
            self.value.clone(),
            self.theo.clone(),
        );
        c.meta = self.meta.clone();
        c
    }
}

fn cell(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

/// Writes `r,value,theo[,lo,hi,mean]` as CSV (masked points as empty cells) or the full
/// table as JSON (masked points as `null`). Values use the shortest representation that
/// reads back to the same `f64`.
pub fn write_curve(table: &CurveTable, path: impl AsRef<Path>, format: CurveFormat) -> Result<()> {
    check_grid(&table.r)?;
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        CurveFormat::Csv => {
            if table.envelope.is_some() {
                writeln!(w, "r,value,theo,lo,hi,mean")?;
            } else {
                writeln!(w, "r,value,theo")?;
            }
            for k in 0..table.r.len() {
                write!(w, "{},{},{}", table.r[k], cell(table.value[k]), cell(table.theo[k]))?;
                if let Some(b) = &table.envelope {
                    write!(w, ",{},{},{}", cell(b.lo[k]), cell(b.hi[k]), cell(b.mean[k]))?;
                }
                writeln!(w)?;
            }
        }
        CurveFormat::Json => {
            serde_json::to_writer_pretty(&mut w, table).map_err(std::io::Error::other)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_curve`]. CSV files carry no label or metadata; the
/// label becomes the file stem.
pub fn read_curve(path: impl AsRef<Path>, format: CurveFormat) -> Result<CurveTable> {
    let path = path.as_ref();
    match format {
        CurveFormat::Json => {
            let text = std::fs::read_to_string(path).map_err(|e| open_err(path, e))?;
            serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e.to_string()))
        }
        CurveFormat::Csv => read_curve_csv(path),
    }
}

fn read_curve_csv(path: &Path) -> Result<CurveTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let base = ["r", "value", "theo"]
        .iter()
        .map(|c| required(path, &headers, c))
        .collect::<Result<Vec<_>>>()?;
    let bands = ["lo", "hi", "mean"]
        .iter()
        .map(|c| column(&headers, &[c]))
        .collect::<Option<Vec<_>>>();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 6];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let idx = base.iter().chain(bands.iter().flatten());
        for (slot, (&i, name)) in idx.zip(["r", "value", "theo", "lo", "hi", "mean"]).enumerate() {
            let s = rec.get(i).unwrap_or("");
            let v = if s.is_empty() && slot > 0 {
                f64::NAN
            } else {
                number(path, line, name, s)?
            };
            cols[slot].push(v);
        }
    }
    let mut it = cols.into_iter();
    let (r, value, theo) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    let envelope = bands.map(|_| Bands {
        lo: it.next().unwrap(),
        hi: it.next().unwrap(),
        mean: it.next().unwrap(),
    });
    Ok(CurveTable {
        label: path.file_stem().and_then(|s| s.to_str()).unwrap_or("curve").to_string(),
        r,
        value,
        theo,
        envelope,
        meta: BTreeMap::new(),
    })
}

/// Writes any serializable value as pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::other)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn output_path(dir: &Path, stem: &str, format: CurveFormat) -> PathBuf {
    dir.join(format!("{stem}.{}", format.extension()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn xy_only_pattern() {
        let d = tempfile::tempdir().unwrap();
        let (p, rep) = read_pattern_csv(write(d.path(), "p.csv", "x,y\n0,0\n1,2\n")).unwrap();
        assert_eq!(p.n(), 2);
        assert!(p.types().is_none() && p.marks().is_none());
        assert_eq!(rep.rows, 2);
    }

    #[test]
    fn non_numeric_coordinate_reports_line() {
        let d = tempfile::tempdir().unwrap();
        let err = read_pattern_table(write(d.path(), "p.csv", "x,y\n0,0\nabc,1\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_column() {
        let d = tempfile::tempdir().unwrap();
        let err = read_pattern_table(write(d.path(), "p.csv", "x,z\n0,0\n")).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { ref column, .. } if column == "y"));
    }

    #[test]
    fn string_labels_map_lexicographically() {
        let d = tempfile::tempdir().unwrap();
        let t = read_pattern_table(write(d.path(), "p.csv", "x,y,type\n0,0,B\n1,1,A\n2,2,B\n")).unwrap();
        assert_eq!(t.types, Some(vec![2, 1, 2]));
        assert_eq!(t.report.type_mapping, vec!["A", "B"]);
        let n = read_pattern_table(write(d.path(), "q.csv", "x,y,type\n0,0,10\n1,1,2\n")).unwrap();
        assert_eq!(n.types, Some(vec![2, 1]));
    }

    #[test]
    fn dropped_and_duplicate_rows() {
        let d = tempfile::tempdir().unwrap();
        let text = "x,y,mark1\n0,0,1\n,1,2\n0,0,3\n";
        let t = read_pattern_table(write(d.path(), "p.csv", text)).unwrap();
        assert_eq!(t.coords.len(), 2);
        assert_eq!(t.report.dropped, vec![(3, "missing coordinate".to_string())]);
        assert_eq!(t.report.duplicates, vec![4]);
        assert_eq!(t.marks, Some(vec![1.0, 3.0]));
    }

    #[test]
    fn csv_network_single_segment() {
        let d = tempfile::tempdir().unwrap();
        let net = read_network(write(d.path(), "n.csv", "x1,y1,x2,y2\n0,0,3,4\n")).unwrap();
        assert_eq!(net.n_segments(), 1);
        assert_eq!(net.total_length(), 5.0);
    }

    #[test]
    fn geojson_linestrings() {
        let d = tempfile::tempdir().unwrap();
        let one = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{},"geometry":{"type":"LineString","coordinates":[[0,0],[1,0],[1,1]]}}]}"#;
        let net = read_network(write(d.path(), "a.geojson", one)).unwrap();
        assert_eq!((net.n_vertices(), net.n_segments()), (3, 2));

        let two = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[1,0]]}},
            {"type":"Feature","geometry":{"type":"LineString","coordinates":[[1,0],[2,0]]}}]}"#;
        let net = read_network(write(d.path(), "b.json", two)).unwrap();
        assert_eq!(net.n_vertices(), 3);
        let shared = net.vertices().iter().position(|v| *v == [1.0, 0.0]).unwrap();
        assert_eq!(net.adjacency()[shared].len(), 2);
    }

    #[test]
    fn near_coincident_endpoints_snap() {
        let d = tempfile::tempdir().unwrap();
        let text = "x1,y1,x2,y2\n0,0,1,0\n1.0000000000001,0,1,1\n";
        let net = read_network(write(d.path(), "n.csv", text)).unwrap();
        assert_eq!(net.n_vertices(), 3);
    }

    #[test]
    fn curve_round_trip() {
        let d = tempfile::tempdir().unwrap();
        let c = SummaryCurve::new(
            "K",
            vec![0.0, 0.1, 0.30000000000000004],
            vec![f64::NAN, 1.0 / 3.0, 2.0f64.sqrt()],
            vec![0.0, std::f64::consts::PI, 1e-300],
        );
        for fmt in [CurveFormat::Csv, CurveFormat::Json] {
            let path = d.path().join(format!("k.{fmt}"));
            let t = CurveTable::from(&c);
            write_curve(&t, &path, fmt).unwrap();
            let back = read_curve(&path, fmt).unwrap();
            assert_eq!(back.r, t.r);
            assert!(back.value[0].is_nan());
            assert_eq!(back.value[1..], t.value[1..]);
            assert_eq!(back.theo, t.theo);
        }
    }

    #[test]
    fn masked_envelope_cells() {
        let d = tempfile::tempdir().unwrap();
        let t = CurveTable {
            label: "e".into(),
            r: vec![0.0, 1.0],
            value: vec![1.0, 1.0],
            theo: vec![1.0, 1.0],
            envelope: Some(Bands {
                lo: vec![f64::NAN, 0.5],
                hi: vec![f64::NAN, 1.5],
                mean: vec![f64::NAN, 1.0],
            }),
            meta: BTreeMap::new(),
        };
        let csv_path = d.path().join("e.csv");
        write_curve(&t, &csv_path, CurveFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert_eq!(text.lines().nth(1), Some("0,1,1,,,"));
        let json_path = d.path().join("e.json");
        write_curve(&t, &json_path, CurveFormat::Json).unwrap();
        assert!(std::fs::read_to_string(&json_path).unwrap().contains("null"));
        assert_eq!(
            read_curve(&csv_path, CurveFormat::Csv).unwrap().envelope.unwrap().hi[1],
            1.5
        );
    }

    #[test]
    fn empty_grid_is_rejected() {
        let d = tempfile::tempdir().unwrap();
        let t = CurveTable::from(&SummaryCurve::new("x", vec![], vec![], vec![]));
        assert!(write_curve(&t, d.path().join("x.csv"), CurveFormat::Csv).is_err());
    }
}
