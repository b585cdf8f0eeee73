use thiserror::Error;

/// Errors produced by the quadrature library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("collocation order must be at least {min}, got {k}")]
    InvalidOrder { k: usize, min: usize },

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix or vector contains non-finite entries")]
    NonFinite,

    #[error("SVD did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("Newton iteration for Gauss-Legendre nodes did not converge (n = {n})")]
    GaussNoConvergence { n: usize },

    #[error("non-finite integrand sample at x = {x}")]
    NonFiniteSample { x: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("function `{name}` takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("unknown integral `{0}`")]
    UnknownIntegral(String),

    #[error("no closed form available for {0}")]
    NoClosedForm(String),

    #[error("missing parameter `{param}` for {id}")]
    MissingParameter { id: String, param: String },
}

pub type Result<T> = std::result::Result<T, Error>;
