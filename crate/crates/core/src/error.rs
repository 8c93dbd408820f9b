use thiserror::Error;

pub type Result<T> = std::result::Result<T, QfaError>;

#[derive(Debug, Error)]
pub enum QfaError {
    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("irreducible representation mismatch: {0}")]
    IrrepMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operation undefined for the zero element: {0}")]
    ZeroElement(String),

    #[error("spectral decomposition did not converge")]
    DecompositionFailure,

    #[error("quadrature budget exhausted on [{lo}, {hi}] (estimated error {error:e})")]
    QuadratureBudget { lo: f64, hi: f64, error: f64 },

    #[error("no straddling pair found: attained range [{min}, {max}] does not contain {target}")]
    StraddleNotFound { target: f64, min: f64, max: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}
