use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A stated precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Requested operation is not supported for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The singular initial value problem fails the eigenvalue gate.
    #[error("malgrange gate failed: {0}")]
    Malgrange(String),
    /// A numerical procedure did not converge or lost accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Integration stopped at `t` with step size below the floor.
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64, state: Vec<f64> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
