use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("binding error: {0}")]
    Binding(String),
    #[error("dimension mismatch: {what} expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("non-finite objective value {value} at point {point:?}")]
    Objective { value: f64, point: Vec<f64> },
    #[error("degenerate scaling for {column}: all values equal {value}")]
    Scaling { column: String, value: f64 },
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn dimension(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension { what, expected, got }
    }
}
