use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid exponent p = {0}: must satisfy p >= 1 (use inf for the max-norm)")]
    InvalidExponent(f64),

    #[error("cannot parse exponent {0:?}: expected a number >= 1 or \"inf\"")]
    ExponentSyntax(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },

    #[error("point cloud is empty: no width is defined")]
    EmptyCloud,

    #[error("size guard exceeded: {what} = {value}, limit {limit}")]
    SizeGuard {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("entry ({row}, {col}) = {value} is not +1 or -1")]
    NotSignEntry { row: usize, col: usize, value: i64 },

    #[error("matrix of order {0} is not a Hadamard matrix")]
    NotHadamard(usize),

    #[error("matrix is singular")]
    Singular,

    #[error("outside the supported regime: {0}")]
    Regime(String),

    #[error("bisection cannot bracket: the covering fails even at shrink factor 1")]
    NoBracket,

    #[error("label {label} of point {index} is outside the label space 0..{limit}")]
    LabelOutOfRange { index: usize, label: usize, limit: usize },

    #[error("{labels} labels supplied for {points} points")]
    LabelCount { labels: usize, points: usize },

    #[error("point {index} lies in no cross-polytope piece and no spike (max even functional {excess}); the normalized cloud is not contained in the slab region")]
    Unassignable { index: usize, excess: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
