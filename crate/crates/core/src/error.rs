use thiserror::Error;

/// Errors raised by geometric oracles, lattice construction and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point is not strictly interior to the body (margin {margin:e})")]
    PointNotInterior { margin: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("scale factor must be positive, got {0}")]
    NonpositiveFactor(f64),
    #[error("body is degenerate (volume {0:e})")]
    DegenerateBody(f64),
    #[error("cap width {width} outside the admissible range (0, {max})")]
    WidthOutOfRange { width: f64, max: f64 },
    #[error("input points span an affine subspace of dimension {span} < {dim}")]
    DegenerateInput { span: usize, dim: usize },
    #[error("picker returned a point outside the relative interior of face {face}")]
    PickerPointNotInFace { face: usize },
    #[error("points coincide")]
    CoincidentPoints,
    #[error("quadrature budget too small: {0}")]
    BudgetTooSmall(String),
    #[error("invalid region specification: {0}")]
    InvalidSpec(String),
    #[error("body is not a polytope; its asymptotic volume is infinite")]
    NonPolytopeBody,
    #[error("epsilon {eps:e} needs more than {budget} vertices")]
    EpsilonTooSmall { eps: f64, budget: usize },
    #[error("invalid sandwich certificate: {0}")]
    InvalidCertificate(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("fit did not converge: residual rms {rms:e} above {threshold:e}")]
    NonConvergentFit { rms: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
