use thiserror::Error;

/// Errors raised by the group, system and filter operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The logarithm was requested outside the injectivity radius of `exp`.
    #[error("logarithm undefined: rotation angle {angle} is at or beyond pi")]
    LogOutOfDomain { angle: f64 },

    /// A group element was constructed with a non-positive scale.
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    /// A geometric quantity is undefined at the given state.
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),

    /// The local mean left the region where the chart is trusted.
    #[error("local mean norm {norm} exceeds chart radius {radius}; reduce the step size or the correction")]
    ChartDomain { norm: f64, radius: f64 },

    /// An iterative chart inversion failed.
    #[error("chart inversion did not converge after {iterations} iterations (residual {residual})")]
    ChartInversion { iterations: usize, residual: f64 },

    /// Prediction was requested on a belief that still carries a local mean.
    #[error("belief has a non-zero local mean; apply the reset step before predicting")]
    UnresetBelief,

    /// A matrix expected to be symmetric positive-definite is not.
    #[error("{0} is not symmetric positive-definite")]
    NotPositiveDefinite(&'static str),

    /// A matrix that must be inverted is singular.
    #[error("{0} is singular")]
    Singular(&'static str),

    /// Mismatched vector or matrix dimensions.
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An analytic Jacobian disagrees with its finite-difference cross-check.
    #[error("{which} Jacobian disagrees with finite differences (relative error {relative_error:.3e})")]
    JacobianMismatch {
        which: &'static str,
        relative_error: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
