use thiserror::Error;

use crate::model::AdId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or invalid instance/bid document. `location` is a JSON-path
    /// style pointer such as `ads[2][0]`.
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid ad id {0}")]
    InvalidAd(AdId),

    #[error("dimension mismatch: expected {expected} entries, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("weights must be strictly positive, one per winning-ad member")]
    InvalidWeights,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("grid has {required} points but the budget allows {allowed}")]
    BudgetExceeded { required: String, allowed: u64 },

    #[error("grid resolution must be positive")]
    InvalidResolution,

    #[error("no grid point is an equilibrium at this resolution")]
    NoGridEquilibrium,

    #[error("numbers too large for the grid oracle")]
    Overflow,

    #[error("invalid contract: {0}")]
    InvalidContract(String),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
