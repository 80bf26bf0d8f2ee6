use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("monomial {exponent:?} has degree {degree}, maximum allowed is {max}")]
    DegreeTooHigh {
        exponent: Vec<u32>,
        degree: u32,
        max: u32,
    },

    #[error("invalid polynomial data: {0}")]
    InvalidPolynomial(String),

    #[error("cannot parse number {0:?}")]
    ParseNumber(String),

    #[error("invalid SDP: {0}")]
    InvalidSdp(String),

    #[error("SDPA parse error on line {line}: {msg}")]
    SdpaParse { line: usize, msg: String },

    #[error("solver failure during {stage}: {msg}")]
    Solver { stage: String, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("step failed: {0}")]
    StepFailed(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
