use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} is outside the parameter domain of {geometry}")]
    Domain { geometry: String, point: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate tube: h_eps = {h} <= 0 at eps = {eps} (eps too large)")]
    DegenerateTube { eps: f64, h: f64 },

    #[error("unsupported geometry for this operation: {0}")]
    UnsupportedGeometry(String),

    #[error("transverse projection of a zero field is undefined")]
    ZeroField,

    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("factorization failed at every shift tried ({tries} tries, last shift {last_shift})")]
    ShiftRetryExhausted { tries: usize, last_shift: f64 },

    #[error("eigensolver did not converge after {iterations} iterations ({converged}/{wanted} pairs converged)")]
    NoConvergence {
        iterations: usize,
        converged: usize,
        wanted: usize,
        partial: Box<crate::eigensolve::Spectrum>,
    },

    #[error("dimension {dim} exceeds the dense reference cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("oracle resolution {0} is below the minimum of 64")]
    OracleResolution(usize),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
