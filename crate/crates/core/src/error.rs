use thiserror::Error;

/// Errors produced by the numerical and symbolic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("subshift is empty: no infinite sequence avoids the forbidden words")]
    EmptySubshift,

    #[error("letter {letter} is out of range for an alphabet of size {alphabet}")]
    LetterOutOfRange { letter: usize, alphabet: usize },

    #[error("invalid subshift: {0}")]
    InvalidSubshift(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("singular value function requires t >= 0, got {0}")]
    NegativeT(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("depth {depth} needs {words} words, budget allows {budget}")]
    DepthBudgetExceeded {
        depth: usize,
        words: u128,
        budget: u128,
    },

    #[error("map {map} is not contractive: operator norm {norm}")]
    NonContractive { map: usize, norm: f64 },

    #[error("map {map} is not diagonal")]
    NotDiagonal { map: usize },

    #[error("t = {0} is outside the supported range")]
    TOutOfRange(f64),

    #[error("step [{from}, {to}] crosses the integer {integer}")]
    IntegerCrossing { from: f64, to: f64, integer: i64 },

    #[error("cylinder of length {requested} requested, distribution only has depth {available}")]
    DepthExceeded { requested: usize, available: usize },

    #[error("window length {k} exceeds the sequence depth {n}")]
    WindowOverrun { k: usize, n: usize },

    #[error("scale {scale} is below the cloud resolution limit {limit}")]
    ScaleTooFine { scale: f64, limit: f64 },

    #[error("need at least {needed} points, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
