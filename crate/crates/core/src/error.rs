use thiserror::Error;

/// Errors shared by every module of the laboratory.
///
/// `HypothesisNotMet` is deliberately distinct from `Domain`: it flags
/// parameter combinations for which a checked estimate simply does not
/// apply (e.g. `t > eps^alpha` in the Dirichlet comparison), so sweeps
/// can skip those points instead of aborting.
#[derive(Debug, Error)]
pub enum Error {
    /// The caller violated an operation's domain (bad parameter, wrong shape).
    #[error("domain error: {0}")]
    Domain(String),

    /// The hypothesis of the underlying estimate fails for these parameters;
    /// the check is inapplicable rather than failed.
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    /// A numerical routine could not certify its accuracy target.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// The requested operation is not defined for this variant.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Error::HypothesisNotMet(msg.into())
    }

    pub fn accuracy(msg: impl Into<String>) -> Self {
        Error::Accuracy(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
