use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("existence probability out of range: r = {r} (component {index})")]
    ExistenceOutOfRange { index: usize, r: f64 },

    #[error("covariance is not positive semi-definite: smallest eigenvalue {min_eigenvalue:e} (component {index})")]
    NotPsd { index: usize, min_eigenvalue: f64 },

    #[error("matrix square root failed: inner matrix has eigenvalue {min_eigenvalue:e}")]
    SqrtFailure { min_eigenvalue: f64 },

    #[error("malformed density: {0}")]
    MalformedDensity(String),

    #[error("invalid metric parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{what} size {found} exceeds the limit of {limit}")]
    SizeBound { what: &'static str, found: usize, limit: usize },

    #[error("base distance {base} not applicable: {reason}")]
    BaseDistance { base: &'static str, reason: String },

    #[error("mixture has no entries")]
    EmptyMixture,

    #[error("invalid mixture weight {weight} at entry {index}")]
    InvalidWeight { index: usize, weight: f64 },

    #[error("invalid transport marginals: {0}")]
    InvalidMarginals(String),

    #[error("grid too coarse: resolution {resolution} below minimum {minimum}")]
    GridTooCoarse { resolution: usize, minimum: usize },

    #[error("grid oracle requires {0}")]
    GridDomain(String),

    #[error("transport solver did not converge after {0} pivots")]
    TransportStalled(usize),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("run directory: {0}")]
    RunLayout(String),

    #[error("unrecognized document: expected one of {expected}")]
    UnknownDocument { expected: &'static str },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }

    /// True when the failure comes from reading or parsing input text.
    pub fn is_parse(&self) -> bool {
        matches!(self, Self::Json(_) | Self::UnknownDocument { .. })
    }
}
