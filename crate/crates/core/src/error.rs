use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("{0} did not converge")]
    Convergence(&'static str),
    #[error("no origin data")]
    NoOriginData,
    #[error("empty reference distribution")]
    EmptyReference,
    #[error("too many bins: {k} requested but only {classes} frequency classes")]
    TooManyBins { k: usize, classes: usize },
    #[error("at least 2 bins are required, got {0}")]
    TooFewBins(usize),
    #[error("empty expected cell at index {0}")]
    EmptyExpectedCell(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("observed counts sum to {observed}, expected n = {n}")]
    CountMismatch { observed: u64, n: u64 },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("zero marginal total in contingency table")]
    ZeroMarginal,
    #[error("infinite noncentrality at category {0}")]
    InfiniteNoncentrality(usize),
    #[error("number of tests must be at least 1")]
    NoTests,
    #[error("draw size {draw} exceeds {distinct} distinct names")]
    DrawTooLarge { draw: usize, distinct: usize },
    #[error("test conditions still fail at 2 bins")]
    ConditionsUnmet,
    #[error("scenario {0}: test conditions still fail at 2 bins")]
    ConditionFallbackExhausted(usize),
    #[error("unknown source tag `{0}`")]
    UnknownSource(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
