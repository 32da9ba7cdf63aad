use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 2")]
    InvalidDimension(usize),

    #[error("unsupported dimension {0}: reference MUBs exist for d in 2..=7")]
    UnsupportedDimension(usize),

    #[error("{what} = {value} outside the allowed range [{low}, {high}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector not normalized: norm^2 = {0}")]
    NotNormalized(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("relabeling enumeration of {raw} candidates exceeds the bound {bound}; use the LP membership test instead")]
    EnumerationTooLarge { raw: f64, bound: f64 },

    #[error("{count} deterministic strategies exceed the vertex cap {cap}; use column generation")]
    VertexCapExceeded { count: f64, cap: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("LP failure: {0}")]
    Lp(#[from] crate::polytope::LpFailure),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty inequality family")]
    EmptyFamily,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
