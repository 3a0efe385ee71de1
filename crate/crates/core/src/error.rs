use thiserror::Error;

/// Errors produced by grid construction, the linear solvers and the analysis harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("solver did not converge: relative residual {residual:.3e} > tol {tol:.3e} after {iterations} refinement steps")]
    NotConverged {
        residual: f64,
        tol: f64,
        iterations: usize,
    },

    #[error("empty far-field set: no node lies at distance >= sqrt(h) = {threshold:.4} from the interface")]
    EmptyFarField { threshold: f64 },

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
