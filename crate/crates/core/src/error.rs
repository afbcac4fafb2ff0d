use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid input distribution: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// The least-squares multiplier problem is underdetermined. `forced` carries the
    /// value implied by the equality conditions when there is one.
    #[error("degenerate multiplier estimate ({reason}); perturb the support")]
    DegenerateMultiplier { reason: String, forced: Option<f64> },

    #[error("infeasible cost budget: {0}")]
    InfeasibleBudget(String),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
