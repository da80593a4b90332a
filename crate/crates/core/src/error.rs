use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid weight law: {0}")]
    InvalidLaw(String),

    #[error("invalid Borel set: {0}")]
    InvalidSet(String),

    #[error("invalid connection rule: {0}")]
    InvalidRule(String),

    #[error("invalid subgraph family: {0}")]
    InvalidFamily(String),

    #[error("connector {connector} undefined at ({x}, {y})")]
    Domain {
        connector: &'static str,
        x: f64,
        y: f64,
    },

    #[error("probability {0} outside the open unit interval")]
    ProbabilityOutOfRange(f64),

    #[error("vertex {index} out of range for graph on {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("graph too small: need at least {needed} vertices, have {n}")]
    TooFewVertices { needed: usize, n: usize },

    #[error("graph size {n} exceeds the configured cap {cap}")]
    GraphTooLarge { n: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("zeta is zero; CLT inapplicable")]
    ZetaZero,

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
