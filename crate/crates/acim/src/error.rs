use thiserror::Error;

/// Errors shared across the crate.
///
/// Non-convergence of a truncated series is deliberately *not* an error:
/// it is reported through [`crate::series::TailReport`] so callers can
/// inspect how far the computation got.
#[derive(Debug, Error)]
pub enum AcimError {
    /// Two grids that must agree in domain and resolution do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The subtractive step is undefined on the diagonal x = y.
    #[error("subtractive step undefined on the diagonal (x = y = {0})")]
    DiagonalStep(f64),

    /// Numerical quadrature failed its internal agreement check.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// A parameter string could not be parsed or is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, AcimError>;
