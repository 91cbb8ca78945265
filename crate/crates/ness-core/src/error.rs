//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction and the steady-state solvers.
#[derive(Debug, Error)]
pub enum NessError {
    /// A physical parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Inputs that must refer to the same system disagree in size.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// The generator has more than one steady state (or none reachable).
    #[error("degenerate steady state: null space dimension {null_dim}")]
    DegenerateSteadyState { null_dim: usize },

    /// A resistor-network functional is undefined because a connector and the
    /// bath rate vanish together.
    #[error("degenerate network: zero coupling encountered with w_beta = 0")]
    DegenerateNetwork,

    /// Explicit integration was requested with a step too large for the
    /// stiffest rate in the generator.
    #[error("step size {dt} violates stiffness bound; use dt <= {suggested_dt}")]
    Stiffness { dt: f64, suggested_dt: f64 },

    /// The linear solver failed outside of the recognized degeneracies.
    #[error("linear solve failed: {context}")]
    SolveFailed { context: String },
}

pub type Result<T> = std::result::Result<T, NessError>;

impl NessError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        NessError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn dims(context: impl Into<String>) -> Self {
        NessError::DimensionMismatch {
            context: context.into(),
        }
    }
}
