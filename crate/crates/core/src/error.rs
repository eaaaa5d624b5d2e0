use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not normalised: total {total} (tolerance {tolerance})")]
    NotNormalised { total: f64, tolerance: f64 },

    #[error("declared monotonicity violated: {0}")]
    NotMonotone(String),

    #[error("inverse undefined: {0}")]
    InverseUndefined(String),

    #[error("insufficient resolution: {got} thresholds, need at least {min}")]
    InsufficientResolution { got: usize, min: usize },

    #[error("unbounded support requires explicit truncation")]
    UnboundedSupport,

    #[error("no witness exists: {0}")]
    NoWitness(String),

    #[error("pair is not comparable: {0}")]
    NotComparable(String),

    #[error("not contractive: |h'({at})| = {slope} exceeds 1")]
    NotContractive { at: f64, slope: f64 },

    #[error("degenerate dimension: column {0} has zero variance")]
    DegenerateDimension(usize),

    #[error("support truncated too aggressively: binned mass {mass}")]
    SupportTruncated { mass: f64 },

    #[error("extend support: mass {mass_beyond} lies beyond the grid")]
    ExtendSupport { mass_beyond: f64 },

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }

    /// Errors caused by the caller's input (as opposed to a numerical
    /// validity failure of an otherwise well-formed request).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::InvalidArgument(_)
                | Error::InvalidGrid(_)
        )
    }
}
