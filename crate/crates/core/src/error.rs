use thiserror::Error;

use crate::Cplx;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero {0} lies outside the open unit disk")]
    ZeroOutsideDisk(Cplx),
    #[error("constant {0} is not unimodular")]
    NonUnimodularConstant(Cplx),
    #[error("a Blaschke product needs at least one zero")]
    EmptyProduct,
    #[error("zero {0} was given multiplicity 0")]
    ZeroMultiplicity(Cplx),
    #[error("non-finite value in input")]
    NonFinite,

    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("root iteration did not converge after {iterations} iterations (degree {degree})")]
    NoConvergence { degree: usize, iterations: usize },
    #[error("found {found} critical points in the disk, expected {expected}")]
    BochnerCountViolation { found: usize, expected: usize },
    #[error("preimage {0} of a disk value fell outside the disk")]
    PreimageOutsideDisk(Cplx),

    #[error("path passes within {distance:.3e} of branch point {point}")]
    PathTooCloseToBranchPoint { point: Cplx, distance: f64 },
    #[error("{0} is too close to the branch set for pointwise local inverses")]
    NearBranchPoint(Cplx),
    #[error("two sheets merged while tracking near {0}")]
    TrackingCollision(Cplx),
    #[error("step size underflow while tracking near {0}")]
    MinStepReached(Cplx),
    #[error("no admissible base point near the boundary")]
    NoValidBasePoint,
    #[error("the image-circle lift is not an n-cycle (orbit of the identity sheet has length {0})")]
    LabelingFailed(usize),
    #[error("boundary loop permuted the labeled fiber: {0:?}")]
    BoundaryLoopNotIdentity(Vec<usize>),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("block {0:?} has no inverse block")]
    InverseBlockMissing(Vec<usize>),
    #[error("could not recover block multisets at the origin: {0}")]
    MultisetRecovery(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(&'static str),

    #[error("cross-check failed: computed {computed}, expected {expected}")]
    CrossCheckFailed { computed: String, expected: String },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
