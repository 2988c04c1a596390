use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator not PSD: quadratic form {value:e} below -{threshold:e}")]
    NotPsd { value: f64, threshold: f64 },

    #[error("power iteration did not converge after {iterations} iterations (best estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("unsupported conjugate for {0}")]
    UnsupportedConjugate(&'static str),

    #[error("undefined Lagrangian value (+inf - inf) at {0}")]
    UndefinedLagrangian(String),

    #[error("unbounded step size: coupling matrix and smoothness are both zero")]
    UnboundedStepSize,

    #[error("unknown instance generator `{0}`")]
    UnknownGenerator(String),

    #[error("algorithm `{algorithm}` does not support this problem: {reason}")]
    Unsupported {
        algorithm: &'static str,
        reason: String,
    },

    #[error("inner solve stopped after {iterations} iterations with residual {residual:e}")]
    InnerSolve {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("step {k} failed: {source}")]
    Step {
        k: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
