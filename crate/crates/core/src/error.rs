use thiserror::Error;

use crate::oracle::TraceEntry;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate curve: speed {speed:e} at parameter u = {u}")]
    DegenerateCurve { u: f64, speed: f64 },

    #[error("curve does not close up: endpoint gap {gap:e} (typical spacing {spacing:e})")]
    Closure { gap: f64, spacing: f64 },

    #[error("non-finite value in {0}")]
    Numeric(&'static str),

    #[error("frame integration failed: orthonormality drift {drift:e} exceeds {cap:e}; increase n_steps")]
    IntegrationFailure { drift: f64, cap: f64 },

    #[error("tube overlaps itself: {0}")]
    InvalidGeometry(String),

    #[error("closed-form hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("too few samples: {got} < {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("ambiguous nearest point at distance {distance:e}: s = {s1} and s = {s2}")]
    Ambiguous { s1: f64, s2: f64, distance: f64 },

    #[error("finite-difference stencil of radius {h:e} leaves the domain (margin {margin:e})")]
    Stencil { h: f64, margin: f64 },

    #[error("only {admissible} of {requested} samples are admissible after margin filtering")]
    Undersampled { admissible: usize, requested: usize },

    #[error("voxelized domain is empty")]
    EmptyDomain,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("Dinkelbach iteration did not converge in {} iterations", trace.len())]
    NonConvergence { trace: Vec<TraceEntry> },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
