use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature failed on [{a}, {b}]: {reason}")]
    QuadratureFailure { a: f64, b: f64, reason: String },

    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    #[error("schedule exceeds cap: {0}")]
    CapExceeded(String),

    #[error("t = {0} is a junction between warp pieces; the second derivative is undefined there")]
    Breakpoint(f64),

    #[error("invalid warp: {0}")]
    InvalidWarp(String),

    #[error("growth curve is empty")]
    EmptyCurve,

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("window [r, r + {window}] does not fit inside the trace (span {span})")]
    WindowExceedsTrace { window: f64, span: f64 },

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("size cap exceeded: {entries} matrix entries > {cap}")]
    SizeCap { entries: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
