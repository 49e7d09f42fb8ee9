use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive interval: t_end ({t_end}) must exceed t_start ({t_start})")]
    NonPositiveInterval { t_start: f64, t_end: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid physical constants: {0}")]
    InvalidConstants(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("coordinate {x} is not a grid point (nearest {nearest})")]
    NotAGridPoint { x: f64, nearest: f64 },

    #[error("enumeration of {count} paths exceeds the cap of {cap}")]
    EnumerationCap { count: u128, cap: u64 },

    #[error("path has {got} positions, time grid needs {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("no interior points: n_slices = {0}, need at least 2")]
    NoInteriorPoints(usize),

    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("focal point: |sin(omega T)| = {sin_abs:e} is below {eps:e}")]
    FocalPoint { sin_abs: f64, eps: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("tau must be interior: index {index} not in 1..{n_slices}")]
    TauNotInterior { index: usize, n_slices: usize },

    #[error("solver did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("conjugate point encountered: smallest Hessian eigenvalue {eigenvalue:e} (scaled {scaled:e})")]
    ConjugatePoint { eigenvalue: f64, scaled: f64 },

    #[error("truncation policy violated: {detail} (edge leak {edge_leak:e})")]
    TruncationPolicy { detail: String, edge_leak: f64 },

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the CLI: 1 validation, 2 numerical failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonPositiveInterval { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidConstants(_)
            | Error::InvalidPotential(_)
            | Error::NotAGridPoint { .. }
            | Error::EnumerationCap { .. }
            | Error::LengthMismatch { .. }
            | Error::NoInteriorPoints(_)
            | Error::NonPositiveStep(_)
            | Error::GridMismatch(_)
            | Error::TauNotInterior { .. }
            | Error::TruncationPolicy { .. }
            | Error::Config(_)
            | Error::Json(_) => 1,
            Error::FocalPoint { .. } | Error::NotConverged { .. } | Error::ConjugatePoint { .. } => 2,
            Error::Io(_) => 3,
        }
    }
}
