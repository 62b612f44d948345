use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("multiplicity mismatch: expected Q = {expected}, got {found}")]
    MultiplicityMismatch { expected: usize, found: usize },

    #[error("brute-force matching refused for Q = {q}: limit is Q <= {limit}")]
    BruteForceLimit { q: usize, limit: usize },

    #[error("gradient is singular at ({u}, {v}) (branch point)")]
    Singular { u: f64, v: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("disk of radius {radius} about ({u}, {v}) leaves the field's domain")]
    Domain { u: f64, v: f64, radius: f64 },

    #[error("degenerate height {height:e}: the field vanishes on the circle")]
    DegenerateHeight { height: f64 },

    #[error("degenerate energy {energy:e}: no conformal completion exists")]
    DegenerateEnergy { energy: f64 },

    #[error("power-series fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    SeriesFit { residual: f64, tolerance: f64 },

    #[error("sheet component is not harmonic (Laplacian coefficient {coefficient:e})")]
    NotHarmonic { coefficient: f64 },

    #[error("invalid field: {0}")]
    InvalidField(String),
}

pub type Result<T> = std::result::Result<T, Error>;
