use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("profile has nonzero mean {0}")]
    NonZeroMean(f64),

    #[error("lattice size N = {0} is too small")]
    SizeTooSmall(usize),

    #[error("sampled a_{index} = {value} is not positive; profile amplitude too large for this N")]
    NonPositiveOffDiagonal { index: usize, value: f64 },

    #[error("symmetric eigensolver did not converge")]
    NoConvergence,

    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),

    #[error("galerkin eigenvalue {index} moved by {shift:e} when doubling the truncation")]
    TruncationNotConverged { index: usize, shift: f64 },

    #[error("step halving changed the discriminant at lambda = {lambda} by {change:e}")]
    StepRefinement { lambda: Complex64, change: f64 },

    #[error("derivative of the discriminant has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("quasimodes are not independent: overlap {0} >= 1")]
    DependentQuasimodes(f64),

    #[error("need at least 3 rows with positive error for a rate fit, got {0}")]
    InsufficientData(usize),

    #[error("spectrum too short: need index {needed}, have {available}")]
    SpectrumTooShort { needed: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("golden check failed:\n{0}")]
    Golden(String),

    #[error("suite {suite}: {source}")]
    Suite {
        suite: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
