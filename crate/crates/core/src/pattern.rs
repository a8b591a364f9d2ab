//! Marked point patterns on planar windows or linear networks.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::estimate::{self, Pair, PairTable};
use crate::metric::{MetricEngine, NetworkMetric};
use crate::network::{LinearNetwork, NetworkLocation, Point};
use crate::window::Window;

/// Where a pattern lives.
#[derive(Debug, Clone)]
pub enum Support {
    Planar(Window),
    Network(Arc<NetworkMetric>),
}

/// Selects the second component of a cross/dot statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Type(u32),
    /// every point of the pattern (dot-type statistics)
    All,
}

#[derive(Debug, Clone)]
pub struct MarkedPattern {
    support: Support,
    coords: Vec<Point>,
    locations: Vec<NetworkLocation>,
    types: Option<Vec<u32>>,
    type_labels: Option<Vec<String>>,
    marks: Option<Vec<f64>>,
    second_marks: Option<Vec<f64>>,
    pair_cache: OnceLock<Arc<PairTable>>,
}

impl MarkedPattern {
    /// Unmarked planar pattern; every point must lie in the window.
    pub fn planar(window: Window, coords: Vec<Point>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|&p| !window.contains(p)) {
            return Err(Error::InvalidPattern(format!(
                "point {i} at ({}, {}) lies outside the window",
                coords[i][0], coords[i][1]
            )));
        }
        Ok(Self {
            support: Support::Planar(window),
            coords,
            locations: Vec::new(),
            types: None,
            type_labels: None,
            marks: None,
            second_marks: None,
            pair_cache: OnceLock::new(),
        })
    }

    /// Unmarked network pattern.
    pub fn on_network(metric: Arc<NetworkMetric>, locations: Vec<NetworkLocation>) -> Result<Self> {
        let net = metric.network().clone();
        for &loc in &locations {
            net.check_location(loc)?;
        }
        let coords = locations.iter().map(|&l| net.embed(l)).collect();
        Ok(Self {
            support: Support::Network(metric),
            coords,
            locations,
            types: None,
            type_labels: None,
            marks: None,
            second_marks: None,
            pair_cache: OnceLock::new(),
        })
    }

    /// Type labels in `1..=k`; every label in that range must occur.
    pub fn with_types(mut self, types: Vec<u32>) -> Result<Self> {
        self.check_len(types.len(), "types")?;
        if let Some(&k) = types.iter().max() {
            let mut seen = vec![false; k as usize + 1];
            for &t in &types {
                if t == 0 {
                    return Err(Error::InvalidPattern("type labels start at 1".into()));
                }
                seen[t as usize] = true;
            }
            if let Some(missing) = (1..=k).find(|&t| !seen[t as usize]) {
                return Err(Error::EmptyComponent(missing));
            }
        }
        self.types = Some(types);
        Ok(self)
    }

    /// Human-readable names for types `1..=k`, in label order.
    pub fn with_type_labels(mut self, labels: Vec<String>) -> Self {
        self.type_labels = Some(labels);
        self
    }

    pub fn with_marks(mut self, marks: Vec<f64>) -> Result<Self> {
        self.check_len(marks.len(), "marks")?;
        check_finite(&marks)?;
        self.marks = Some(marks);
        Ok(self)
    }

    pub fn with_second_marks(mut self, marks: Vec<f64>) -> Result<Self> {
        self.check_len(marks.len(), "second marks")?;
        check_finite(&marks)?;
        self.second_marks = Some(marks);
        Ok(self)
    }

    fn check_len(&self, got: usize, what: &str) -> Result<()> {
        if got != self.n() {
            return Err(Error::InvalidPattern(format!(
                "{what} has length {got}, pattern has {} points",
                self.n()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn is_network(&self) -> bool {
        matches!(self.support, Support::Network(_))
    }

    pub fn window(&self) -> Result<&Window> {
        match &self.support {
            Support::Planar(w) => Ok(w),
            Support::Network(_) => Err(Error::WrongSupport { expected: "planar" }),
        }
    }

    pub fn metric(&self) -> Result<&Arc<NetworkMetric>> {
        match &self.support {
            Support::Network(m) => Ok(m),
            Support::Planar(_) => Err(Error::WrongSupport { expected: "network" }),
        }
    }

    pub fn network(&self) -> Result<&Arc<LinearNetwork>> {
        Ok(self.metric()?.network())
    }

    /// Area of the window or length of the network.
    pub fn domain_measure(&self) -> f64 {
        match &self.support {
            Support::Planar(w) => w.area(),
            Support::Network(m) => m.network().total_length(),
        }
    }

    /// Planar coordinates (the embedding, for network patterns).
    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    /// Network locations; empty for planar patterns.
    pub fn locations(&self) -> &[NetworkLocation] {
        &self.locations
    }

    pub fn types(&self) -> Option<&[u32]> {
        self.types.as_deref()
    }

    pub fn type_labels(&self) -> Option<&[String]> {
        self.type_labels.as_deref()
    }

    pub fn marks(&self) -> Option<&[f64]> {
        self.marks.as_deref()
    }

    pub fn second_marks(&self) -> Option<&[f64]> {
        self.second_marks.as_deref()
    }

    pub fn require_types(&self) -> Result<&[u32]> {
        self.types().ok_or(Error::NoTypes)
    }

    pub fn require_marks(&self) -> Result<&[f64]> {
        self.marks().ok_or(Error::NoMarks)
    }

    /// Number of types `k` (0 if untyped).
    pub fn n_types(&self) -> u32 {
        self.types().and_then(|t| t.iter().max().copied()).unwrap_or(0)
    }

    /// Point counts `n_1..n_k`.
    pub fn type_counts(&self) -> Result<Vec<usize>> {
        let types = self.require_types()?;
        let mut counts = vec![0usize; self.n_types() as usize];
        for &t in types {
            counts[t as usize - 1] += 1;
        }
        Ok(counts)
    }

    /// Indices of the points selected by `target`.
    pub fn indices(&self, target: Target) -> Result<Vec<usize>> {
        match target {
            Target::All => Ok((0..self.n()).collect()),
            Target::Type(t) => {
                let types = self.require_types()?;
                let idx: Vec<usize> = (0..self.n()).filter(|&i| types[i] == t).collect();
                if idx.is_empty() {
                    Err(Error::EmptyComponent(t))
                } else {
                    Ok(idx)
                }
            }
        }
    }

    /// Sub-pattern with the given points, keeping marks and type labels.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let pick = |v: &Option<Vec<f64>>| v.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect());
        Self {
            support: self.support.clone(),
            coords: idx.iter().map(|&i| self.coords[i]).collect(),
            locations: if self.locations.is_empty() {
                Vec::new()
            } else {
                idx.iter().map(|&i| self.locations[i]).collect()
            },
            types: self.types.as_ref().map(|t| idx.iter().map(|&i| t[i]).collect()),
            type_labels: self.type_labels.clone(),
            marks: pick(&self.marks),
            second_marks: pick(&self.second_marks),
            pair_cache: OnceLock::new(),
        }
    }

    /// One pattern per type, in type order; each keeps its original labels.
    pub fn split_by_type(&self) -> Result<Vec<MarkedPattern>> {
        let types = self.require_types()?;
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &t) in types.iter().enumerate() {
            groups.entry(t).or_default().push(i);
        }
        Ok(groups.values().map(|idx| self.subset(idx)).collect())
    }

    /// Same locations, new marks and types; reuses any cached pair geometry.
    pub(crate) fn relabelled(
        &self,
        types: Option<Vec<u32>>,
        marks: Option<Vec<f64>>,
        second_marks: Option<Vec<f64>>,
    ) -> Self {
        Self {
            support: self.support.clone(),
            coords: self.coords.clone(),
            locations: self.locations.clone(),
            types,
            type_labels: self.type_labels.clone(),
            marks,
            second_marks,
            pair_cache: self.pair_cache.clone(),
        }
    }

    /// Replaces the real-valued marks, keeping locations and cached geometry.
    pub fn with_replaced_marks(&self, marks: Vec<f64>) -> Result<Self> {
        self.check_len(marks.len(), "marks")?;
        check_finite(&marks)?;
        Ok(self.relabelled(self.types.clone(), Some(marks), self.second_marks.clone()))
    }

    /// Distance between points `i` and `j` in the pattern's own metric.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match &self.support {
            Support::Planar(_) => crate::network::euclidean(self.coords[i], self.coords[j]),
            Support::Network(m) => m.distance(self.locations[i], self.locations[j]),
        }
    }

    /// Shortest-path engine over the data points.
    pub fn metric_engine(&self) -> Result<MetricEngine> {
        MetricEngine::new(self.metric()?.clone(), self.locations.clone())
    }

    /// Distances and geometric corrections for every ordered pair, computed once.
    pub fn network_pairs(&self) -> Result<Arc<PairTable>> {
        self.metric()?;
        Ok(self
            .pair_cache
            .get_or_init(|| Arc::new(PairTable::network(self)))
            .clone())
    }

    /// Mark mean, population variance and the kernel-smoothed conditional mean mark.
    pub fn mark_moments(&self, bandwidth: Option<f64>) -> Result<MarkMoments> {
        let marks = self.require_marks()?;
        if marks.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        let m = crate::testfn::Moments::of(marks);
        let bandwidth = match bandwidth {
            Some(h) if h > 0.0 => h,
            Some(h) => return Err(Error::NonPositiveBandwidth(h)),
            None => estimate::default_bandwidth(self),
        };
        let mut pairs = estimate::all_pairs(self)?;
        pairs.sort_by(|a, b| a.dist.total_cmp(&b.dist));
        Ok(MarkMoments {
            mean: m.mean,
            variance: m.variance,
            bandwidth,
            pairs,
            marks: marks.to_vec(),
        })
    }

    /// `c = sum_i n_i (n - n_i) / (n (n - 1))`.
    pub fn mingling_constant(&self) -> Result<f64> {
        let counts = self.type_counts()?;
        let n = self.n();
        if n < 2 {
            return Err(Error::TooFewPoints { needed: 2, got: n });
        }
        let nf = n as f64;
        Ok(counts.iter().map(|&ni| ni as f64 * (nf - ni as f64)).sum::<f64>() / (nf * (nf - 1.0)))
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|m| m.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidPattern("marks must be finite".into()))
    }
}

/// Moments of the real-valued marks.
#[derive(Debug, Clone)]
pub struct MarkMoments {
    pub mean: f64,
    pub variance: f64,
    pub bandwidth: f64,
    pairs: Vec<Pair>,
    marks: Vec<f64>,
}

impl MarkMoments {
    /// Epanechnikov-weighted mean mark `mu_m(r)` over ordered pairs at distance about `r`;
    /// `None` where no pair falls inside the kernel window.
    pub fn conditional_mean_at(&self, r: f64) -> Option<f64> {
        let h = self.bandwidth;
        let start = self.pairs.partition_point(|p| p.dist <= r - h);
        let (mut num, mut den) = (0.0, 0.0);
        for p in self.pairs[start..].iter().take_while(|p| p.dist < r + h) {
            let k = estimate::epanechnikov(r - p.dist, h) * p.weight;
            num += k * self.marks[p.from];
            den += k;
        }
        (den > 0.0).then(|| num / den)
    }
}
