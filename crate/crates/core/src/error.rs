use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("letter {letter} is outside the alphabet 1..={alphabet}")]
    InvalidLetter { letter: usize, alphabet: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("word {word} has length {len} but the signature depth is {depth}")]
    WordTooLong { word: String, len: usize, depth: usize },

    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },

    #[error("interval mismatch: first ends at {end}, second starts at {start}")]
    IntervalMismatch { end: f64, start: f64 },

    #[error("a path needs at least 2 sample points, got {0}")]
    TooFewPoints(usize),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("signature with d = {dim} and depth {depth} exceeds the 1e8 entry limit")]
    SignatureTooLarge { dim: usize, depth: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("correlation matrix is not positive semi-definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("quadrature did not converge: relative change {change:e} after maximum refinement")]
    QuadratureNonConvergence { change: f64 },

    #[error("unknown catalog function `{0}`")]
    UnknownCatalog(String),

    #[error("{0} requires a geometric (Stratonovich) lift: the shuffle identity fails for Itô lifts")]
    GeometricLiftRequired(&'static str),

    #[error("missing initial values: {0}")]
    MissingInitialValues(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureNonConvergence { .. })
    }
}
