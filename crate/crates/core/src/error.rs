use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a supported prime (need a prime p >= 5)")]
    InvalidPrime(u64),
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("precision error: need {needed} coefficients, have {available}")]
    Precision { needed: usize, available: usize },
    #[error("unsupported weight {0}")]
    UnsupportedWeight(i64),
    #[error("membership check failed: {0}")]
    Membership(String),
    #[error("bad prime {0}: use U_p for the prime of the coefficient field")]
    BadPrime(u64),
    #[error("not an eigenform: {0}")]
    NotEigenform(String),
    #[error("space kind error: {0}")]
    Kind(String),
    #[error("subspace not stable: {0}")]
    Stability(String),
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("compatibility error: {0}")]
    Compatibility(String),
    #[error("input sequence not exact at index {index}: {reason}")]
    InputNotExact { index: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn precision(needed: usize, available: usize) -> Self {
        Error::Precision { needed, available }
    }

    /// True when the error means a mathematical identity failed on concrete data,
    /// as opposed to bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::Membership(_) | Error::Stability(_) | Error::Compatibility(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidPrime(_) => "InvalidPrime",
            Error::RingMismatch(..) => "RingMismatch",
            Error::Precision { .. } => "PrecisionError",
            Error::UnsupportedWeight(_) => "UnsupportedWeight",
            Error::Membership(_) => "MembershipError",
            Error::BadPrime(_) => "BadPrime",
            Error::NotEigenform(_) => "NotEigenform",
            Error::Kind(_) => "KindError",
            Error::Stability(_) => "StabilityError",
            Error::InvalidDescriptor(_) => "InvalidDescriptor",
            Error::Degree(_) => "DegreeError",
            Error::Classification(_) => "ClassificationError",
            Error::Compatibility(_) => "CompatibilityError",
            Error::InputNotExact { .. } => "InputNotExact",
            Error::Parse(_) => "ParseError",
            Error::Invalid(_) => "InvalidInput",
        }
    }
}
