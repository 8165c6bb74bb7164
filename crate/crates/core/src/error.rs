use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violated one of its invariants. `field` names the offending
    /// configuration entry.
    #[error("invalid {field}: {message}")]
    InvalidParameter { field: String, message: String },

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// The intracoupling critical manifold has no real branch at `rho1`
    /// (negative discriminant).
    #[error("no real manifold branch at rho1 = {rho1}")]
    NoRealBranch { rho1: f64 },

    /// State became NaN or infinite during integration.
    #[error("non-finite state ({what}) at t = {t}")]
    NonFinite { t: f64, what: String },

    /// The phase equation divides by a vanishing order-parameter magnitude.
    #[error("phase equation singular for population {population}: rho = {rho}")]
    PhaseSingularity { population: usize, rho: f64 },

    #[error("vanishing denominator in {0}")]
    VanishingDenominator(&'static str),

    #[error("rho1 = {0} outside the open interval (0, 1)")]
    RhoOutOfDomain(f64),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::ProbabilityOutOfRange(_) | Error::EmptyInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
