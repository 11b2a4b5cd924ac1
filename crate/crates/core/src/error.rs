use thiserror::Error;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    InvalidGridSize(usize),

    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },

    #[error("fields live on different grids ({left} vs {right} points)")]
    GridMismatch { left: usize, right: usize },

    #[error("weight is negative or complex at sample {index}")]
    InvalidWeight { index: usize },

    #[error("boundary jump of about {jump:.3e} makes the sin^-2 kernel non-integrable")]
    BoundaryJump { jump: f64 },

    #[error("conjugate velocity is not holomorphic: residual {residual:.3e} exceeds {limit:.3e}")]
    NotHolomorphic { residual: f64, limit: f64 },

    #[error("Z' vanishes at sample {index}")]
    DegenerateMap { index: usize },

    #[error("A1 = {value:.6} at sample {index} is below 1/2")]
    A1TooSmall { index: usize, value: f64 },

    #[error("anchor point {alpha} is not a grid point")]
    OffGridAnchor { alpha: f64 },

    #[error("non-finite value after step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("crest normalization failed: {0}")]
    CrestNormalization(String),

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
