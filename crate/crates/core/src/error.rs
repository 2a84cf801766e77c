use std::io;

use thiserror::Error;

/// Errors raised by loading, modelling, fitting and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file (header, column count, unparsable field).
    #[error("format error: {0}")]
    Format(String),
    /// Well-formed input whose content violates a data invariant.
    #[error("data error: {0}")]
    Data(String),
    /// Caller passed an argument outside the operation's domain.
    #[error("argument error: {0}")]
    Argument(String),
    /// Model parameters violate their invariants.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A fit could not be carried out on the supplied trials.
    #[error("fit error: {0}")]
    Fit(String),
    /// Pearson correlation is undefined when either input is constant.
    #[error("degenerate variance")]
    DegenerateVariance,
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
