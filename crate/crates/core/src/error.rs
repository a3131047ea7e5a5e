//! Error types shared across the crate.

use std::fmt;

/// Errors raised by series construction, evaluation, and verification.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A weight was odd, negative, or outside the range an operation supports.
    BadWeight { k: i64, reason: &'static str },
    /// An index argument (n, ell, ...) was outside the operation's domain.
    BadIndex { what: &'static str },
    /// Attempted to invert a power series with zero constant term.
    NonInvertible,
    /// Evaluation point on or outside the unit circle.
    Divergence,
    /// Requested accuracy cannot be certified; the message suggests a remedy.
    Precision(String),
    /// A verified mathematical property failed; this indicates an
    /// implementation defect, not bad input.
    Integrity(String),
    /// Missing or malformed configuration.
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadWeight { k, reason } => write!(f, "unsupported weight k={}: {}", k, reason),
            Error::BadIndex { what } => write!(f, "argument out of domain: {}", what),
            Error::NonInvertible => write!(f, "series has zero constant term and no reciprocal"),
            Error::Divergence => write!(f, "evaluation point is not strictly inside the unit disc"),
            Error::Precision(msg) => write!(f, "precision error: {}", msg),
            Error::Integrity(msg) => write!(f, "integrity check failed: {}", msg),
            Error::Config(msg) => write!(f, "configuration error: {}", msg),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
