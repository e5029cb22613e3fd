use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite provider output at lambda={lambda}, t={t}")]
    NonFinite { lambda: f64, t: f64 },

    #[error("order {order} is outside the domain of this operation (requires {expected})")]
    OrderDomain {
        order: Complex64,
        expected: &'static str,
    },

    #[error("{what} did not converge: achieved {achieved:e} after {iterations} iterations")]
    Convergence {
        what: &'static str,
        achieved: f64,
        iterations: usize,
    },

    #[error("{what} is not independent of lambda: spread {spread:e} exceeds tolerance {tol:e}")]
    Inconsistent {
        what: &'static str,
        spread: f64,
        tol: f64,
    },

    #[error("no admissible lambda for order {order}: every candidate fails the conditioning guard")]
    DegenerateLambda { order: Complex64 },

    #[error("subtraction left |phi(lambda,0)| = {residual:e} above tolerance {tol:e}")]
    SubtractionFailure { residual: f64, tol: f64 },

    #[error("cocycle relation violated: residual {residual:e} exceeds tolerance {tol:e}")]
    CocycleViolation { residual: f64, tol: f64 },

    #[error("decomposition failed: reconstruction residual {residual:e} exceeds tolerance {tol:e}")]
    DecompositionFailure { residual: f64, tol: f64 },

    #[error("quadrature failed to reach tolerance {tol:e} (estimated error {achieved:e})")]
    Quadrature { achieved: f64, tol: f64 },

    #[error("symbol of order {k} in dimension {n} is not trace class (requires Re k < -n)")]
    NotTraceClass { k: Complex64, n: usize },

    #[error("pole locus: order {order} is a nonnegative integer; {hint}")]
    PoleLocus {
        order: Complex64,
        hint: &'static str,
    },

    #[error("order {order} is not a nonnegative integer; {hint}")]
    NotPoleLocus {
        order: Complex64,
        hint: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Validation errors stem from malformed input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::DimensionMismatch { .. })
    }
}
