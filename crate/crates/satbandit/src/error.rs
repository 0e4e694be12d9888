//! Harness error type.

use std::fmt;

#[derive(Debug)]
pub enum HarnessError {
    /// Bad configuration or CLI arguments.
    Config(String),
    /// Error from the simulation kernel.
    Core(satbandit_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(msg) => write!(f, "config error: {msg}"),
            HarnessError::Core(e) => write!(f, "{e}"),
            HarnessError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<satbandit_core::Error> for HarnessError {
    fn from(e: satbandit_core::Error) -> Self {
        HarnessError::Core(e)
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e)
    }
}

impl HarnessError {
    /// Whether this is a parameter-class failure (CLI exit code 2).
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Core(
                    satbandit_core::Error::Param(_) | satbandit_core::Error::Domain(_)
                )
        )
    }
}
