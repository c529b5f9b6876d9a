use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no Gauss-Legendre rule with {0} points (supported: 1..=10)")]
    UnsupportedRule(usize),

    #[error("unsupported Lagrange degree {0} (supported: 1, 2)")]
    UnsupportedDegree(usize),

    #[error("parent coordinate {0} outside [-1, 1]")]
    OutsideParentDomain(f64),

    #[error("parameter {value} outside knot range [{lo}, {hi}]")]
    OutsideKnotRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("invalid NURBS patch: {0}")]
    InvalidPatch(String),

    #[error("rational basis has zero weight sum")]
    SingularGeometry,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("degenerate element {element}: Jacobian determinant {det_j}")]
    DegenerateElement { element: usize, det_j: f64 },

    #[error("beta = {beta} is at or above the nonlocal cutoff {cutoff}")]
    AboveCutoff { beta: f64, cutoff: f64 },

    #[error("all {0} unknowns are constrained")]
    EmptySystem(usize),

    #[error("constrained index {index} out of range for {size} unknowns")]
    ConstraintOutOfRange { index: usize, size: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    Indefinite { row: usize, pivot: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("local reference frequency is zero")]
    ZeroReference,
}
