use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid demand: {0}")]
    InvalidDemand(String),

    #[error("{what} index {index} out of range 1..={max}")]
    OutOfRange {
        what: &'static str,
        index: u128,
        max: u128,
    },

    #[error("zero has no multiplicative inverse")]
    InverseOfZero,

    #[error("field GF(2^{bits}) has {order} elements but {needed} distinct elements are required; escalate to GF(2^16)")]
    FieldTooSmall { bits: u32, order: usize, needed: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("unrecoverable: {have} symbols available, {need} required")]
    Unrecoverable { have: usize, need: usize },

    #[error("position {0} supplied more than once")]
    DuplicatePosition(usize),

    #[error("sub-packetization C(U,t) = {count} exceeds the cap {cap} (override with PCL_SUBPACK_CAP)")]
    SubpacketizationTooLarge { count: u128, cap: u128 },

    #[error("enumeration of {count} {what} exceeds the cap {cap}; {hint}")]
    EnumerationTooLarge {
        what: &'static str,
        count: u128,
        cap: u128,
        hint: &'static str,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("decode failure for user {user}: file {file} has {have} of {need} required pieces")]
    DecodeFailure {
        user: usize,
        file: usize,
        have: usize,
        need: usize,
    },
}

impl Error {
    /// Errors raised by a resource guard rather than by malformed input.
    pub fn is_guard_rail(&self) -> bool {
        matches!(
            self,
            Error::SubpacketizationTooLarge { .. }
                | Error::EnumerationTooLarge { .. }
                | Error::FieldTooSmall { .. }
        )
    }
}
