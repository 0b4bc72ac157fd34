use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: parameter validation (the caller asked
/// for something outside an operation's domain) and numerical failures (the
/// inputs were admissible but a computation could not meet its contract).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("outside the validity regime: {0}")]
    Regime(String),

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e} after {intervals} subintervals")]
    Quadrature {
        estimate: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("boundary contamination at t = {time}: probability {probability:e} in the outer 5% of the domain")]
    BoundaryContamination { time: f64, probability: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by rejected inputs rather than failed numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
