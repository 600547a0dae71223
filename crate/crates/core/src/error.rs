use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A†| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("degenerate gap: |ω| = {omega:.3e} cm⁻¹ is below the zero-gap tolerance")]
    DegenerateGap { omega: f64 },

    #[error(
        "steady state is not unique: smallest singular values {sigma_min:.3e}, {sigma_next:.3e}"
    )]
    DegenerateSteadyState { sigma_min: f64, sigma_next: f64 },

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    SteadyStateResidual { residual: f64, tolerance: f64 },

    #[error("no truncation convergence by M = {max_dim}; last iterates {last:?}")]
    NoConvergence { max_dim: usize, last: Vec<(usize, f64)> },

    #[error("quadrature did not converge: estimate {estimate:.6e}, error {error:.3e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("propagation unstable: trace drift {drift:.3e} after {halvings} step halvings")]
    Propagation { drift: f64, halvings: u32 },

    #[error("time grid must be strictly increasing")]
    TimeGrid,

    #[error("rate fit failed: {0}")]
    Fit(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status used by the `simulate` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) | Error::UnknownExperiment(_) => 2,
            Error::NoConvergence { .. }
            | Error::DegenerateSteadyState { .. }
            | Error::SteadyStateResidual { .. }
            | Error::Propagation { .. }
            | Error::Quadrature { .. } => 3,
            Error::Validation(_) => 4,
            _ => 1,
        }
    }
}
