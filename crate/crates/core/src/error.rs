use crate::graph::Vertex;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field is not in the Laplacian domain at vertex {0}")]
    NotInDomain(Vertex),
    #[error("field does not have finite support")]
    InfiniteSupport,
    #[error("vertex {vertex} has more than {bound} neighbors")]
    LocallyInfinite { vertex: Vertex, bound: usize },
    #[error("unknown vertex {0}")]
    UnknownVertex(Vertex),
    #[error("ball of radius {radius} exceeded the enumeration budget of {budget} vertices")]
    TruncatedBall { radius: f64, budget: usize },
    #[error("integrator failed to reach tolerance: {0}")]
    NoConvergence(String),
    #[error("neighbor data missing for vertex {0}")]
    IncompleteNeighborData(Vertex),
    #[error("cut-off function leaves its declared support at vertex {0}")]
    SupportNotFixed(Vertex),
    #[error("precondition violated: {}", .0.join("; "))]
    PreconditionViolated(Vec<String>),
    #[error("enumeration budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("witness needs a tail bound outside the enumerated region")]
    MissingTailBound,
    #[error("growth bound is not positive on [1, {0}]")]
    NonPositiveBound(f64),
    #[error("jump size cannot be certified with the available enumeration")]
    Unbounded,
    #[error("working precision of {0} bits is insufficient")]
    PrecisionInsufficient(usize),
    #[error("witness construction failed: {0}")]
    WitnessConstructionFailed(String),
    #[error("metric has no length for edge ({0}, {1})")]
    MissingLength(Vertex, Vertex),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Coarse classification used by the command-line front end for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numeric,
    Precondition,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NoConvergence(_)
            | Error::PrecisionInsufficient(_)
            | Error::WitnessConstructionFailed(_)
            | Error::Unbounded => ErrorClass::Numeric,
            Error::PreconditionViolated(_) | Error::NonPositiveBound(_) => ErrorClass::Precondition,
            _ => ErrorClass::Input,
        }
    }
}
