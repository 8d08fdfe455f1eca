use thiserror::Error;

/// Errors raised by the trap physics, integrators and sweeps.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SibaError {
    /// A configuration field violates its invariant.
    #[error("invalid configuration: {field}: {message}")]
    Validation { field: String, message: String },

    #[error("position {x} outside profile domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("argument out of range: {0}")]
    Range(String),

    /// The requested quantity has a vanishing denominator at this configuration.
    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("no trap: {0}")]
    NoTrap(String),

    #[error("unbound: kinetic energy {e_kin} exceeds trap depth {depth} (shortfall {shortfall})")]
    Unbound { e_kin: f64, depth: f64, shortfall: f64 },

    #[error("not a minimum: spring constant {0} is negative")]
    NotMinimum(f64),

    #[error("no period: trajectory has {crossings} momentum zero crossings, need at least 3")]
    NoPeriod { crossings: usize },

    #[error("integration failed at step {step}: {reason}")]
    Integration { step: usize, reason: String },

    /// Time step too coarse for the cavity linewidth or the motion.
    #[error("unstable time step: {0}")]
    Stability(String),

    #[error("root finding failed: {0}")]
    Convergence(String),
}

impl SibaError {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        SibaError::Validation { field: field.into(), message: message.into() }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            SibaError::Validation { .. }
                | SibaError::Domain { .. }
                | SibaError::Range(_)
                | SibaError::Stability(_)
        )
    }
}

pub type Result<T, E = SibaError> = std::result::Result<T, E>;
