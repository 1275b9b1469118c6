use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid index range [{lo}, {hi}]")]
    InvalidRange { lo: i64, hi: i64 },

    #[error("index {index} outside declared profile range [{lo}, {hi}]")]
    OutsideDeclaredRange { index: i64, lo: i64, hi: i64 },

    #[error("coefficient window [{have_lo}, {have_hi}] does not cover [{want_lo}, {want_hi}]")]
    WindowTooSmall {
        have_lo: i64,
        have_hi: i64,
        want_lo: i64,
        want_hi: i64,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("operation requires a linear profile with rational slope")]
    NotRationalLinear,

    #[error("operation requires a periodic coefficient window")]
    NotPeriodic,

    #[error("zero coefficient at index {index} inside the period")]
    ZeroCoefficient { index: i64 },

    #[error("no zero coefficient inside the period")]
    NoZeroCoefficient,

    #[error("bracketing failure: {0}")]
    Bracketing(String),

    #[error("monotonicity check failed on branch {n} over [{lo}, {hi}]")]
    Monotonicity { n: usize, lo: f64, hi: f64 },

    #[error("branch shape check failed for gamma = {gamma}: {detail}")]
    BranchShape { gamma: f64, detail: String },

    #[error("degenerate blocks disagree across the period")]
    InconsistentBlocks,

    #[error("value {value} outside [-4, 4]")]
    OutOfRange { value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exact arithmetic overflow")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    /// Failures of the numerical root-location machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Bracketing(_) | Error::Monotonicity { .. } | Error::BranchShape { .. } | Error::InconsistentBlocks
        )
    }
}
