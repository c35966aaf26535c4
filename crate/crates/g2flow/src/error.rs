//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Frame dimension or degree mismatch between operands.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Field coefficients living on different grids.
    #[error("grid mismatch: {0}")]
    Grid(String),

    /// Operation applied to a form of invalid degree.
    #[error("degree error: {0}")]
    Degree(String),

    /// Missing grid or u-direction where a field coefficient requires one.
    #[error("configuration error: {0}")]
    Config(String),

    /// Singular or non positive definite metric.
    #[error("metric error: {0}")]
    Metric(String),

    /// A 3-form that does not induce a Riemannian metric.
    #[error("not a positive 3-form: {0}")]
    NotPositive(String),

    /// Torsion extraction failed: the input is not closed or the linear
    /// system is inconsistent.
    #[error("phi not closed or system inconsistent: {0}")]
    Torsion(String),

    /// Structure constants that violate d.d = 0.
    #[error("structure constants violate the Jacobi identity: {0}")]
    Jacobi(String),

    /// Lie derivative along the circle direction does not vanish.
    #[error("not S1-invariant: {0}")]
    NotInvariant(String),

    /// The circle action degenerates somewhere.
    #[error("action not free: {0}")]
    NotFree(String),

    /// Hitchin construction applied to a non-stable 3-form.
    #[error("3-form not stable: {0}")]
    NotStable(String),

    /// Torsion class extraction produced inconsistent pi_1.
    #[error("not an SU(3)-structure torsion set: {0}")]
    TorsionClasses(String),

    /// Numerical abort during a flow (positivity loss, CFL violation, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
