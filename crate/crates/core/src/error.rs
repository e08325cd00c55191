use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{name}` at byte {pos}")]
    UnknownVariable { name: String, pos: usize },

    #[error("arity mismatch: expected {expected} variables, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("computation budget exhausted during {stage}")]
    Budget { stage: String },

    #[error("{what} must not be zero")]
    ZeroInput { what: String },

    #[error("chart index {index} out of range 1..={r}")]
    ChartIndex { index: usize, r: usize },

    #[error("center generators share the nonconstant factor {gcd}; reduce the center first")]
    UnreducedCenter { gcd: String },

    #[error("point does not lie on the center")]
    PointNotOnCenter,

    #[error("point lies on the center; expected a point off it")]
    PointOnCenter,

    #[error("direction is tangent to the center; it determines no exceptional point")]
    TangentDirection,

    #[error("direction is not visible in chart {index}; chart {suggest} works")]
    WrongChart { index: usize, suggest: usize },

    #[error("projected image is dense: no nonzero vanishing polynomial")]
    ImageDense,

    #[error("no monic witness certifies the projection proper on the center")]
    NoProperWitness,

    #[error("genericity failed: {condition}")]
    Genericity { condition: String },

    #[error("{stage}: no usable candidate after {attempts} attempts ({last})")]
    RetryExhausted {
        stage: String,
        attempts: u32,
        last: String,
    },

    #[error("exact division failed during {stage}")]
    DivisionFailed { stage: String },

    #[error("maps disagree on the overlap; no common polynomial extension: {why}")]
    GluingMismatch { why: String },

    #[error("embedding failed: {why}")]
    EmbedFailed { why: String },

    #[error("principality witness is inconclusive: {why}")]
    InconclusiveWitness { why: String },

    #[error("base point is a singular point of the center subscheme")]
    SingularPoint,

    #[error("unsupported input: {what}")]
    Unsupported { what: String },

    #[error("scene error at {pointer}: {msg}")]
    Scene { pointer: String, msg: String },

    #[error("internal invariant violated: {what}")]
    Internal { what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code the command-line driver maps this error to: schema and
    /// usage errors are hard failures (1), honest negatives and exhausted
    /// searches are inconclusive (2).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RetryExhausted { .. }
            | Error::InconclusiveWitness { .. }
            | Error::NoProperWitness
            | Error::ImageDense
            | Error::GluingMismatch { .. }
            | Error::Budget { .. }
            | Error::Genericity { .. } => 2,
            _ => 1,
        }
    }
}
