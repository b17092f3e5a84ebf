use thiserror::Error;

use crate::eig::EigenResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval endpoints [{lo}, {hi}]")]
    InvalidEndpoints { lo: f64, hi: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("division by an interval containing zero: [{lo}, {hi}]")]
    DivisionByZeroInterval { lo: f64, hi: f64 },
    #[error("invalid triangular fuzzy number ({left}, {peak}, {right})")]
    InvalidFuzzyNumber { left: f64, peak: f64, right: f64 },
    #[error("malformed alpha levels: {0}")]
    MalformedLevels(String),
    #[error("cut at alpha = {inner} is not contained in the cut at alpha = {outer}")]
    NestingViolation { outer: f64, inner: f64 },
    #[error("non-conforming split across edge ({0}, {1})")]
    NonConformingSplit(usize, usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate element (area {area:e})")]
    DegenerateElement { area: f64 },
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("every node is constrained")]
    AllNodesConstrained,
    #[error("constrained node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("singular system")]
    SingularSystem,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigen iteration did not converge in {max_iter} iterations (residual {:e})", best.residual)]
    NotConverged {
        max_iter: usize,
        best: Box<EigenResult>,
    },
    #[error("right-hand matrix is not positive definite")]
    IndefiniteB,
    #[error("factorization failed: {0}")]
    FactorizationFailure(String),
    #[error("dimension {dim} exceeds dense solver limit {limit}")]
    DimensionGuard { dim: usize, limit: usize },
    #[error("mesh has no centroid node")]
    MissingCentroid,
    #[error("{context}: {inner}")]
    Context { context: String, inner: Box<Error> },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            inner: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { inner, .. } => inner.root(),
            other => other,
        }
    }
}
