use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("chain is not irreducible")]
    NotIrreducible,
    #[error("support of the transition matrix is not symmetric")]
    AsymmetricSupport,
    #[error("tolerance {0} outside (0, 1e-6]")]
    InvalidTolerance(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("measure charges state {0} where the reference law vanishes")]
    UnsupportedState(usize),
    #[error("no crossing: equation has no root on [0, inf)")]
    NoCrossing,
    #[error("heat kernel entry {value:e} at state {state} is below 1e-300")]
    UnderflowRisk { state: usize, value: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("chain is not certified non-negatively curved (ollivier {ollivier:e}, bakry-emery {bakry_emery:e})")]
    CurvatureHypothesisFailed { ollivier: f64, bakry_emery: f64 },
    #[error("generator set does not generate the group")]
    NotGenerating,
    #[error("generator set is not closed under negation")]
    NotSymmetricSet,
    #[error("random generation failed after {0} redraws")]
    GenerationFailed(usize),
    #[error("state space of size {size} exceeds cap {cap}")]
    StateCapExceeded { size: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("spec parse error: {0}")]
    SpecParse(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}
