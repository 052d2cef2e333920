use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet mismatch between operands")]
    AlphabetMismatch,

    #[error("truncation level mismatch: {left} vs {right}")]
    LevelMismatch { left: usize, right: usize },

    #[error("scalar part must be {expected}, found {found}")]
    ScalarPart { expected: f64, found: f64 },

    #[error("word {word} is longer than truncation level {level}")]
    WordTooLong { word: String, level: usize },

    #[error("letter {letter} is not in the alphabet ({context})")]
    LetterOutOfRange { letter: i32, context: String },

    #[error("cannot parse word token `{token}`")]
    WordParse { token: String },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("truncation level must be at least {min}, got {found}")]
    InvalidLevel { min: usize, found: usize },

    #[error("exponent must be at least 1, got {0}")]
    PVariationExponent(f64),

    #[error("path has {nodes} nodes, the limit for this operation is {limit}")]
    PathTooLong { nodes: usize, limit: usize },

    #[error("time {0} is not a node time of the path")]
    NotNodeTime(f64),

    #[error("paths have different horizons: {0} vs {1}")]
    HorizonMismatch(f64, f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("element is not flagged group-like")]
    NotGroupLike,

    #[error("invalid Levy triplet: {0}")]
    InvalidTriplet(String),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("structural bound violated: {bound} ({detail})")]
    StructuralBound { bound: &'static str, detail: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid payoff: {0}")]
    InvalidPayoff(String),

    #[error("hedge denominator {value:e} below floor at node {node} (t = {time})")]
    DegenerateDenominator { node: usize, time: f64, value: f64 },

    #[error("invalid simulation grid: {0}")]
    InvalidGrid(String),

    #[error("invalid measure change: {0}")]
    InvalidMeasureChange(String),

    #[error("regression failed: {0}")]
    Regression(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
