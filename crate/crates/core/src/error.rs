use std::fmt;

/// Errors raised by numerical routines and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported degree {degree} (maximum {max})")]
    UnsupportedDegree { degree: usize, max: usize },
    #[error("accuracy not reached: {0}")]
    Accuracy(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("growth condition violated: {0}")]
    Growth(String),
    #[error("degenerate normalization: {0}")]
    Degenerate(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search range exhausted: {0}")]
    SearchRange(String),
    #[error("supremum attained at the boundary k = {argmax} (k_max = {k_max}, n = {n})")]
    KmaxTooSmall { n: u64, k_max: u64, argmax: u64 },
    #[error("value out of representable range: {0}")]
    Range(String),
    #[error("inadmissible potential: {0}")]
    Inadmissible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("integration grid rejected {rejected} of {total} paths")]
    IntegrationGrid { rejected: usize, total: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes and the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Unsupported(_) => ErrorKind::Usage,
            _ => ErrorKind::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl fmt::Display) -> Error {
    Error::Domain(msg.to_string())
}
