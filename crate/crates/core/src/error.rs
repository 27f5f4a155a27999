use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {0} is not a canonical element of the field")]
    NotInField(u64),
    #[error("modulus is not irreducible: {0}")]
    NotIrreducible(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("singular matrix")]
    Singular,
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("expected {expected} symbols, got {got}")]
    Length { expected: usize, got: usize },
    #[error("index {0} repeated")]
    Duplicate(usize),
    #[error("node index {index} out of range for n = {n}")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("helper {0} coincides with the failed node")]
    HelperIsFailed(usize),
    #[error("helper {0} is not in the helper set")]
    NotAHelper(usize),
    #[error("helper {0} is unreachable from the failed node")]
    Unreachable(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("component {component} needs an MSR code with k = {k}, d = {d}; none is available")]
    Unrealizable { component: usize, k: usize, d: usize },
    #[error("bad helper assignment: {0}")]
    BadAssignment(String),
    #[error("infeasible download plan: {0}")]
    InfeasiblePlan(String),
    #[error("instance too large for exhaustive search: {0}")]
    ScaleTooLarge(String),
    #[error("rank decoding failed")]
    DecodeFailure,
    #[error("rank distance too small: N - K = {slack} < 2 * {omega}")]
    RadiusExceeded { slack: usize, omega: u64 },
    #[error("graph input: {0}")]
    Graph(String),
    #[error("not at the minimum-storage point: {0}")]
    NotMsr(String),
}

pub type Result<T> = std::result::Result<T, Error>;
