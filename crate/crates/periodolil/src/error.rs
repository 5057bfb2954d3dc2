//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by generators, transforms and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition was violated (e.g. `ln ln n` undefined).
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument was structurally invalid (empty list, bad range, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A generator produced a non-finite or out-of-range value.
    #[error("generation error: {0}")]
    Generation(String),

    /// A numerical routine failed to converge or lost precision.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An estimator could not produce a usable value.
    #[error("estimator error: {0}")]
    Estimator(String),

    /// Invalid input data fed to a diagnostic (negative term, non-monotone
    /// quantile function, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Configuration file could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure while reading configs or writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
