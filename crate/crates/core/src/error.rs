use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by network construction, estimators, simulation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("network has no vertices or no segments")]
    EmptyNetwork,
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("segment {segment} references vertex {vertex}, but only {n_vertices} vertices exist")]
    DanglingIndex {
        segment: usize,
        vertex: usize,
        n_vertices: usize,
    },
    #[error("segment {0} has zero length")]
    ZeroLengthSegment(usize),
    #[error("spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("network has no terminal vertex")]
    NoBorder,
    #[error("invalid network location: segment {segment}, offset {offset}")]
    InvalidLocation { segment: usize, offset: f64 },

    #[error("pattern carries no type labels")]
    NoTypes,
    #[error("pattern carries no real-valued marks")]
    NoMarks,
    #[error("pattern carries no second real-valued mark")]
    NoSecondMarks,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("component {0} has no points")]
    EmptyComponent(u32),
    #[error("only one type present; mingling is undefined")]
    SingleType,
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("operation requires a {expected} pattern")]
    WrongSupport { expected: &'static str },

    #[error("distance grid must be non-empty, finite and increasing")]
    UnsortedGrid,
    #[error("normalizing factor of {0} is zero")]
    ZeroNormalizer(&'static str),
    #[error("{0} requires strictly positive marks")]
    NonPositiveMarks(&'static str),
    #[error("intensity has {got} values, expected {expected}")]
    IntensityLength { expected: usize, got: usize },
    #[error("supplied intensity values are missing")]
    MissingSuppliedValues,
    #[error("intensity must be positive and finite")]
    NonPositiveIntensity,
    #[error("test function {0} is not available on linear networks")]
    UnsupportedTestFunction(&'static str),
    #[error("{0} edge correction is not available for this window")]
    UnsupportedCorrection(&'static str),
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("curve grids differ between replicates")]
    GridMismatch,
    #[error("replicate {replicate} failed: {source}")]
    SimulationFailure {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid envelope parameters: n_sim = {n_sim}, rank = {rank}")]
    InvalidEnvelope { n_sim: usize, rank: usize },
    #[error("network generation failed after {0} attempts")]
    GenerationFailed(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: missing column {column}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
