use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A population parameter violates its invariant.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    /// An estimator or formula was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The stationarity system of a weight quadratic has no unique solution.
    #[error("degenerate quadratic: 4*c11*c22 - c12^2 = {det:e}")]
    DegenerateQuadratic { det: f64 },

    #[error("weights: {0}")]
    Weights(String),

    #[error("simulation failed: {0}")]
    Simulation(String),

    /// Monte Carlo standard error is zero but the estimate disagrees with theory.
    #[error("degenerate comparison: zero Monte Carlo standard error with empirical mse {empirical} != theory {theory}")]
    DegenerateComparison { empirical: f64, theory: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateQuadratic { .. } => 3,
            Error::Simulation(_) | Error::DegenerateComparison { .. } => 4,
            _ => 2,
        }
    }
}
