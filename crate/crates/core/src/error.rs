use thiserror::Error;

/// Errors raised by the construction, simulation and calibration routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("unsupported parity: {0}")]
    UnsupportedParity(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate spectrum: eigenvalues {0} and {1} coincide")]
    DegenerateSpectrum(usize, usize),
    #[error("basis mismatch: basis has {expected} sites, model has {got}")]
    BasisMismatch { expected: usize, got: usize },
    #[error("time step {dt} ns does not resolve pulse edges (need dt <= {max} ns)")]
    Resolution { dt: f64, max: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("degenerate secant step: |v1 - v0| = {0}")]
    DegenerateSecant(f64),
    #[error("control amplitude {zpa} outside [{min}, {max}]")]
    OutOfRange { zpa: f64, min: f64, max: f64 },
    #[error("cost evaluation failed: {0}")]
    CostEvaluation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
