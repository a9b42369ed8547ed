use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("point identifier `{0}` does not belong to the probability space")]
    ForeignPoint(String),
    #[error("duplicate point identifier `{0}`")]
    DuplicatePoint(String),
    #[error("weight of point `{point}` must be strictly positive, got {weight}")]
    NonPositiveWeight { point: String, weight: String },
    #[error("weights must sum to exactly 1, got {0}")]
    WeightSumNotOne(String),
    #[error("probability space has no points")]
    EmptySpace,
    #[error("conditioning event has zero probability")]
    ZeroCondition,
    #[error("event is not a context for the partition (some cell meets it with zero probability)")]
    NotAContext,
    #[error("interference coefficient is undefined: a factor under the radical vanishes")]
    DegenerateRadical,
    #[error("context is not trigonometric (|lambda| > 1 for some outcome)")]
    NotTrigonometric,
    #[error("transition matrix is not double stochastic")]
    NotDoubleStochastic,
    #[error("operator is not Hermitian")]
    NotHermitian,
    #[error("a-basis vectors are linearly dependent")]
    SingularBasis,
    #[error("sign convention requires eps1 = -eps2")]
    EqualSigns,
    #[error("variable `{0}` must take two distinct values")]
    EqualValues(String),
    #[error("variable `{variable}` has no value at point `{point}`")]
    PartialAssignment { variable: String, point: String },
    #[error("variable `{variable}`: assignment index {index} at point `{point}` is not 1 or 2")]
    BadAssignmentIndex {
        variable: String,
        point: String,
        index: i64,
    },
    #[error("variable `{0}` leaves one of its two cells empty")]
    EmptyCell(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("partition must have exactly two cells for this operation, got {0}")]
    NotDichotomous(usize),
    #[error("cell index out of range")]
    CellIndex,
    #[error("exhaustive enumeration is capped at {cap} points, space has {points}")]
    TooManyPoints { points: usize, cap: usize },
    #[error("q must be a rational strictly between 0 and 1/2, got {0}")]
    QOutOfRange(String),
    #[error("malformed model document: {0}")]
    MalformedDocument(String),
    #[error("invalid rational literal `{0}`")]
    BadRational(String),
    #[error("{0}")]
    Unsupported(String),
}
