use thiserror::Error;

use crate::arith::Congruence;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two congruences of a system disagree modulo the gcd of their moduli.
    #[error("incompatible congruences #{first_index} ({first}) and #{second_index} ({second})")]
    Incompatible {
        first_index: usize,
        first: Congruence,
        second_index: usize,
        second: Congruence,
    },

    #[error("value {value} exceeds the configured ceiling {ceiling}")]
    CeilingExceeded { value: String, ceiling: String },

    #[error("search exhausted below {ceiling}")]
    SearchExhausted { ceiling: String },

    #[error("enumeration ceiling {ceiling} too small: {what}")]
    EnumerationCeiling { what: String, ceiling: String },

    #[error("inclusion-exclusion width {width} with period {period} exceeds configured limits")]
    TermExplosion { width: usize, period: String },

    #[error("certificate for scale {scale} fails audit at index {index}: {reason}")]
    CertificateAuditFailure {
        scale: u64,
        index: usize,
        reason: String,
    },

    #[error("no coprime certificate declared for scale {scale}")]
    CertificateMissing { scale: u64 },

    #[error("position {position} cannot be flipped: {reason}")]
    FlipNotAllowed { position: i64, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn ceiling(value: impl ToString, ceiling: impl ToString) -> Self {
        Error::CeilingExceeded {
            value: value.to_string(),
            ceiling: ceiling.to_string(),
        }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
