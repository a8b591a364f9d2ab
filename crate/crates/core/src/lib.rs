#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Summary characteristics of marked point patterns on planar windows and linear networks.

pub mod cli;
pub mod curve;
pub mod envelope;
pub mod error;
pub mod estimate;
pub mod intensity;
pub mod io;
pub(crate) mod marks;
pub mod metric;
pub mod network;
pub mod network_stats;
pub mod pattern;
pub mod planar;
pub mod repro;
pub mod simulate;
pub mod testfn;
pub mod window;

pub use curve::SummaryCurve;
pub use envelope::EnvelopeResult;
pub use error::{Error, Result};
pub use intensity::{IntensitySurface, NetworkIntensityMode};
pub use marks::MarkWeightedK;
pub use metric::{MetricEngine, NetworkMetric};
pub use network::{LinearNetwork, NetworkLocation, Point};
pub use pattern::{MarkMoments, MarkedPattern, Support, Target};
pub use simulate::{MarkModel, ModelParams, RngSpec};
pub use testfn::TestFunction;
pub use window::Window;
