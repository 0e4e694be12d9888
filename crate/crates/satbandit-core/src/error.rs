//! Error type shared across the kernel.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by the simulation kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A time or arm index fell outside its valid range.
    Range(String),
    /// A call violated an operation's contract (argument shape or ordering).
    Contract(String),
    /// Instance-family parameters violate a named constraint.
    Param(String),
    /// An input lies outside a function's mathematical domain.
    Domain(String),
    /// The schedule does not satisfy an assumption required by an evaluator.
    Assumption(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Range(msg) => write!(f, "range error: {msg}"),
            Error::Contract(msg) => write!(f, "contract error: {msg}"),
            Error::Param(msg) => write!(f, "parameter error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Assumption(msg) => write!(f, "assumption violated: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
