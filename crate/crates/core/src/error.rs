use thiserror::Error;

pub type Result<T, E = BpError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BpError {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{what} requires n <= {limit}, got n = {n}")]
    DenseLimit { what: &'static str, n: usize, limit: usize },

    #[error("{0}")]
    OutOfRange(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("parse error on line {line}: {message}")]
    ParseLine { line: usize, message: String },

    #[error("Lie closure exceeded budget of {limit} elements (reached {reached})")]
    ClosureBudget { limit: usize, reached: usize },

    #[error("operator leaks outside the declared modules (leak norm {leak:.3e})")]
    ModuleMembership { leak: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric tolerance exceeded: {0}")]
    Tolerance(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn ensure_same_n(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(BpError::DimensionMismatch { left, right })
    }
}
