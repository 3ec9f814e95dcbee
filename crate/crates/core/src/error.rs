use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a mesh needs at least one subinterval")]
    EmptyMesh,
    #[error("expected {expected} offsets for degree parameter r, got {got}")]
    OffsetCount { expected: usize, got: usize },
    #[error("offsets must be strictly increasing and lie in [0, 1]: {0:?}")]
    InvalidOffsets(Vec<f64>),
    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(f64),
    #[error("divided difference needs at least one point")]
    NoPoints,
    #[error("repeated point {0} is not adjacent to its other copies")]
    UnsortedRepeats(f64),
    #[error("missing derivative of order {order} at repeated point {at}")]
    MissingDerivative { at: f64, order: usize },
    #[error("Gauss rule order {0} outside 1..=64")]
    QuadratureOrder(usize),
    #[error("integration interval [{a}, {b}] is reversed")]
    ReversedInterval { a: f64, b: f64 },
    #[error("non-finite integrand value at t = {0}")]
    NonFinite(f64),
    #[error("kernel '{0}' provides no analytic s-derivative evaluators")]
    MissingKernelDerivative(String),
    #[error("unknown kernel '{0}'")]
    UnknownKernel(String),
    #[error("point s = {s} is not inside subinterval {j}")]
    OutsideSubinterval { s: f64, j: usize },
    #[error("point s = {s} coincides with a collocation node")]
    NodeCoincidence { s: f64 },
    #[error("subinterval index {j} out of range 1..={n}")]
    SubintervalIndex { j: usize, n: usize },
    #[error("linear system is not square or has mismatched right-hand side")]
    DimensionMismatch,
    #[error("linear system has a non-finite entry")]
    NonFiniteSystem,
    #[error("singular system: zero pivot in column {0}")]
    Singular(usize),
    #[error("ill-conditioned system: condition estimate {0:e} exceeds threshold")]
    IllConditioned(f64),
    #[error("modified solution fails the operator-equation check: residual {0:e}")]
    ReconstructionResidual(f64),
    #[error("expected a {expected} result, got {got}")]
    WrongMethod {
        expected: &'static str,
        got: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
