use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) = {value} is not strictly positive")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, expected 1")]
    RowSumViolation { row: usize, sum: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("experiments are defined over different state spaces")]
    StateSpaceMismatch,

    #[error("invalid state space: {0}")]
    InvalidStateSpace(String),

    #[error("alpha = {0} is outside the admissible range")]
    AlphaOutOfRange(f64),

    #[error("p = {0} must lie strictly between 0 and 1")]
    POutOfRange(f64),

    #[error("sigma = {0} must be positive")]
    SigmaNonPositive(f64),

    #[error("epsilon = {0} must lie in (0, 0.5)")]
    EpsilonOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("prior does not have full support")]
    PriorNotFullSupport,

    #[error("belief does not have full support")]
    NotFullSupport,

    #[error("state space has no numeric values")]
    MissingValues,

    #[error("state values are not distinct")]
    DuplicateValues,

    #[error("invalid beta coefficient at ({row}, {col}): {value}")]
    InvalidBeta { row: usize, col: usize, value: f64 },

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),

    #[error("action {action} is in the support but has probability zero in state {state}")]
    ZeroProbabilityOnSupport { state: usize, action: usize },

    #[error("linear program solver failed: {0}")]
    SolverFailure(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dimension {dim} / order {order} exceed the supported bound (4, 4)")]
    DimensionTooLarge { dim: usize, order: usize },

    #[error("incomplete input: {0}")]
    IncompleteInput(String),

    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("malformed input: {0}")]
    Parse(String),
}
