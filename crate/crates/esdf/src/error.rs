//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Csv {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },

    #[error("{context}: duplicate date {date}")]
    DuplicateDate { context: String, date: String },

    #[error("{context}: dates not strictly increasing at {date}")]
    UnsortedDates { context: String, date: String },

    #[error("{context}: gap in daily dates before {date}")]
    DateGap { context: String, date: String },

    #[error("{context}: value {value} out of range {range}")]
    OutOfRange {
        context: String,
        value: f64,
        range: String,
    },

    #[error("cumulative confirmed decreases at {date} (after cleaning start)")]
    NonMonotoneConfirmed { date: String },

    #[error("date ranges overlap by {days} days, need at least {required}")]
    InsufficientOverlap { days: i64, required: i64 },

    #[error("epidemic date {date} has no mobility observation")]
    MissingMobility { date: String },

    #[error("logit domain error: argument {value} not in (0, 1)")]
    LogitDomain { value: f64 },

    #[error("infectious fraction is zero at interior date {date}")]
    ZeroInfectious { date: String },

    #[error("regression needs n > p + 1 (n = {n}, p = {p})")]
    TooFewObservations { n: usize, p: usize },

    #[error("design matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },

    #[error("sample size {n} outside supported range {min}..={max}")]
    SampleSize { n: usize, min: usize, max: usize },

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error("series contains a zero element at index {index}")]
    ZeroElement { index: usize },

    #[error("{context}: need at least {required} observations, got {got}")]
    NotEnoughData {
        context: String,
        required: usize,
        got: usize,
    },

    #[error("covariance matrix is degenerate (no variance in the data)")]
    DegenerateCovariance,

    #[error("non-finite value during {context} at step {step}")]
    NonFinite { context: String, step: usize },

    #[error("training diverged at epoch {epoch}: objective is not finite")]
    Divergence { epoch: usize },

    #[error("candidate penalty scale list is empty")]
    EmptyCandidates,

    #[error("{failed} lambda value(s) failed to train; partial frontier written")]
    SweepFailures { failed: usize },

    #[error("frontier needs at least 2 points, got {got}")]
    DegenerateFrontier { got: usize },

    #[error("ray from origin does not intersect the frontier within its span")]
    NoRayIntersection,

    #[error("target tracking error {te} lies outside the frontier span [{lo}, {hi}]")]
    TeOutsideSpan { te: f64, lo: f64, hi: f64 },

    #[error("unknown mobility preset `{name}`")]
    UnknownPreset { name: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code contract: 2 input/data, 3 numerical/solver, 4 usage.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Io { .. }
            | Csv { .. }
            | MissingColumn { .. }
            | DuplicateDate { .. }
            | UnsortedDates { .. }
            | DateGap { .. }
            | OutOfRange { .. }
            | NonMonotoneConfirmed { .. }
            | InsufficientOverlap { .. }
            | MissingMobility { .. }
            | ZeroInfectious { .. }
            | UnknownPreset { .. }
            | Json(_) => 2,
            InvalidArgument(_) => 4,
            _ => 3,
        }
    }
}
