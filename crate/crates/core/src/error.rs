use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: must be at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("unknown mode label `{0}`")]
    UnknownMode(String),

    #[error("duplicate mode label `{0}`")]
    DuplicateMode(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operators live on different mode spaces")]
    SpaceMismatch,

    #[error("displacement |beta|^2 = {beta_sq:.4} exceeds truncation guard {limit:.4} (dim/4)")]
    TruncationRisk { beta_sq: f64, limit: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("term {index} has zero frequency; move it into the static part")]
    ZeroFrequencyTerm { index: usize },

    #[error("frequencies {a} and {b} snap to the same grid point but differ; refusing to merge")]
    FrequencyNearMiss { a: f64, b: f64 },

    #[error("term set is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("resonance collision: {0}")]
    ResonanceCollision(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error(
        "integrator instability at t = {time_us:.6} us: trace drift {trace_drift:.3e}, \
         hermiticity defect {hermiticity:.3e}"
    )]
    Instability {
        time_us: f64,
        trace_drift: f64,
        hermiticity: f64,
    },

    #[error("post-selection on `{level}` has probability {probability:.3e}")]
    ZeroProbability { level: String, probability: f64 },

    #[error("channel `{0}` is constant; cannot rescale")]
    DegenerateScaling(String),

    #[error("no crossover in xi range [{lo}, {hi}]")]
    NoCrossover { lo: f64, hi: f64 },

    #[error("sweep point {context}: {source}")]
    AtGridPoint {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Config(_) | Error::Json(_) | Error::InvalidParameter { .. } => true,
            Error::AtGridPoint { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
