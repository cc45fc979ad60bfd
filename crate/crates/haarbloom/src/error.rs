use thiserror::Error;

/// Errors shared across the crate. Numerical routines keep their own
/// soft-failure channels (e.g. convergence flags) and only use these for
/// contract violations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),

    #[error("grid budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error(
        "shift component {component} = {value} is not a multiple of the finest cell side {cell}"
    )]
    ShiftNotQuantized {
        component: usize,
        value: f64,
        cell: f64,
    },

    #[error("cube out of range: {0}")]
    CubeOutOfRange(String),

    #[error("requested depth not available: {0}")]
    DepthOverflow(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signature length mismatch: {0} vs {1}")]
    SignatureMismatch(usize, usize),

    #[error("weight values must be strictly positive and finite (cell {cell} = {value})")]
    NonPositiveWeight { cell: usize, value: f64 },

    #[error("exponent must satisfy {constraint}, got {value}")]
    InvalidExponent {
        constraint: &'static str,
        value: f64,
    },

    #[error("shift coefficient {value} exceeds the size bound {bound}")]
    CoefficientBound { value: f64, bound: f64 },

    #[error("malformed shift table: {0}")]
    MalformedShiftTable(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Error {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Error {
        Error::Serialization(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Error {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
