//! Error type shared across the crate.

use std::error::Error as StdError;
use std::fmt;

/// Errors produced by field construction, code construction, encoding,
/// decoding, channel models and the simulation harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Field exponent outside the supported range 1..=16.
    InvalidExponent { m: u32 },
    /// Reduction polynomial does not have degree exactly `m`.
    WrongPolynomialDegree { poly: u32, m: u32 },
    /// Reduction polynomial has a nontrivial factor.
    ReduciblePolynomial { poly: u32 },
    /// A value does not fit in the field.
    ValueOutOfField { value: u32, order: u32 },
    /// Multiplicative inverse of zero requested.
    ZeroInverse,
    /// The field has fewer elements than the block length requires; an
    /// (n, k) MDS code over GF(2^m) needs 2^m >= n.
    FieldTooSmall { order: u32, block_len: usize },
    /// Code dimensions are inconsistent (k = 0, k > n, and similar).
    BadCodeShape { k: usize, n: usize },
    /// A column id is repeated in a selection.
    DuplicateColumn { id: u16 },
    /// A column id is not present in the matrix being selected from.
    UnknownColumn { id: u16 },
    /// A column selection has fewer columns than message symbols.
    TooFewColumns { have: usize, need: usize },
    /// A message has the wrong number of symbols.
    BadMessageLength { expected: usize, got: usize },
    /// Decoding was attempted with fewer than k distinct headers.
    InsufficientSymbols { have: usize, need: usize },
    /// A linear system that must be invertible turned out singular.
    /// This cannot happen for a correct MDS matrix; it is always a bug.
    SingularSystem,
    /// A k-column subset of a supposed MDS matrix is singular.
    NotMds { columns: Vec<u16> },
    /// Delay too small for the erasure budget; the code rate would be zero.
    RateZero { delay: u64, budget: u64 },
    /// An encoder was driven with a frame whose time does not match its clock.
    ClockMismatch { expected: i64, got: i64 },
    /// Erasure burst longer than the period it must fit in.
    BurstExceedsPeriod { burst: usize, period: usize },
    /// A probability was outside [0, 1].
    BadProbability { value: f64 },
    /// An enumeration or search would exceed the configured guard.
    GuardExceeded { combinations: u128, limit: u128 },
    /// Catch-all for malformed configuration input.
    BadConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidExponent { m } => {
                write!(f, "field exponent {m} not in 1..=16")
            }
            Error::WrongPolynomialDegree { poly, m } => {
                write!(f, "polynomial {poly:#x} does not have degree {m}")
            }
            Error::ReduciblePolynomial { poly } => {
                write!(f, "polynomial {poly:#x} is reducible")
            }
            Error::ValueOutOfField { value, order } => {
                write!(f, "value {value} outside field of order {order}")
            }
            Error::ZeroInverse => write!(f, "zero has no multiplicative inverse"),
            Error::FieldTooSmall { order, block_len } => {
                write!(
                    f,
                    "field with {order} elements cannot host a block of length \
                     {block_len}; the field must have at least as many elements \
                     as the longest block"
                )
            }
            Error::BadCodeShape { k, n } => {
                write!(f, "invalid code shape: k = {k}, n = {n}")
            }
            Error::DuplicateColumn { id } => write!(f, "duplicate column id {id}"),
            Error::UnknownColumn { id } => write!(f, "unknown column id {id}"),
            Error::TooFewColumns { have, need } => {
                write!(f, "selection has {have} columns, need at least {need}")
            }
            Error::BadMessageLength { expected, got } => {
                write!(f, "message has {got} symbols, expected {expected}")
            }
            Error::InsufficientSymbols { have, need } => {
                write!(f, "cannot decode from {have} symbols, need {need}")
            }
            Error::SingularSystem => {
                write!(f, "singular decode system; MDS invariant violated")
            }
            Error::NotMds { columns } => {
                write!(f, "columns {columns:?} are linearly dependent")
            }
            Error::RateZero { delay, budget } => {
                write!(
                    f,
                    "delay {delay} cannot absorb {budget} erasures; rate is zero"
                )
            }
            Error::ClockMismatch { expected, got } => {
                write!(f, "encoder clock at {expected}, frame stamped {got}")
            }
            Error::BurstExceedsPeriod { burst, period } => {
                write!(f, "burst {burst} does not fit in period {period}")
            }
            Error::BadProbability { value } => {
                write!(f, "probability {value} outside [0, 1]")
            }
            Error::GuardExceeded {
                combinations,
                limit,
            } => {
                write!(
                    f,
                    "{combinations} combinations exceed the enumeration guard \
                     of {limit}; reduce the horizon or budgets"
                )
            }
            Error::BadConfig(msg) => write!(f, "{msg}"),
        }
    }
}

impl StdError for Error {}
