use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distribution must have at least one atom")]
    EmptyDistribution,

    #[error("atom {index}: weight {weight} is not positive")]
    NonPositiveWeight { index: usize, weight: f64 },

    #[error("atom {index}: position and weight must be finite")]
    NonFinite { index: usize },

    #[error("total weight {total} is not within 1e-9 of 1")]
    WeightSum { total: f64 },

    #[error("probability level {0} is outside the open interval (0, 1)")]
    InvalidLevel(f64),

    #[error("invalid integration interval ({lo}, {hi}): need 0 <= lo < hi <= 1")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("affine scale must be nonzero and finite")]
    ZeroScale,

    #[error("convolution would form {pairs} pairs, above the cap of {cap}; quantize first")]
    SupportCapExceeded { pairs: usize, cap: usize },

    #[error("number of quantization bins must be at least 1")]
    ZeroBins,

    #[error("distribution is not standardized: mean {mean}, variance {variance}")]
    NotStandardized { mean: f64, variance: f64 },

    #[error("brute-force refinement needs {needed} atoms, above the limit of {limit}")]
    RefinementTooLarge { needed: usize, limit: usize },

    #[error("weights are not close to rationals with a small common denominator")]
    NotNearRational,

    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("row needs {needed} terms, above the cap of {cap}")]
    TermCapExceeded { needed: usize, cap: usize },

    #[error("row is invalid: {0}")]
    InvalidRow(String),

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Broad class of an error, used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Domain,
    Capacity,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            EmptyDistribution
            | NonPositiveWeight { .. }
            | NonFinite { .. }
            | WeightSum { .. }
            | UnknownFamily(_)
            | EmptyInput(_)
            | Parse(_)
            | Json(_)
            | Csv(_) => ErrorKind::Input,
            InvalidLevel(_)
            | InvalidInterval { .. }
            | ZeroScale
            | ZeroBins
            | NotStandardized { .. }
            | RefinementTooLarge { .. }
            | NotNearRational
            | TooFewSamples(_)
            | InvalidEpsilon(_)
            | InvalidRow(_) => ErrorKind::Domain,
            SupportCapExceeded { .. } | TermCapExceeded { .. } => ErrorKind::Capacity,
            Io(_) => ErrorKind::Io,
        }
    }
}
