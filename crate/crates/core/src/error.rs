use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the relation being evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Total damping is not positive, so the oscillator is self-oscillating
    /// and has no thermal steady state.
    #[error("regenerative regime: total damping {gamma_m} rad/s is not positive")]
    Regenerative { gamma_m: f64 },

    #[error("no resolvable peak: maximum {max} does not exceed floor {floor} by 3 sigma ({sigma})")]
    NoPeak { max: f64, floor: f64, sigma: f64 },

    #[error("fit did not converge after {iterations} iterations (cost {cost}, gradient {gradient})")]
    NotConverged {
        iterations: usize,
        cost: f64,
        gradient: f64,
    },

    #[error("singular normal equations after damping escalation (lambda {lambda})")]
    Singular { lambda: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    /// A model cannot reproduce the requested targets within its parameter domain.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The data carry no information about the fitted parameter.
    #[error("insensitive data: {0}")]
    Insensitive(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
