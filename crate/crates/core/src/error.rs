use thiserror::Error;

use crate::executor::ExecutorKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {op}: expected {expected}, got {actual}")]
    Dimension {
        op: &'static str,
        expected: String,
        actual: String,
    },

    #[error("kernel `{kernel}` is not implemented for the {backend:?} backend")]
    UnsupportedBackend {
        kernel: &'static str,
        backend: ExecutorKind,
    },

    #[error("attempted to write through a read-only view")]
    ReadOnly,

    #[error("input and output operands share storage")]
    Aliasing,

    #[error("zero or missing diagonal entry in row {row}")]
    SingularPreconditioner { row: usize },

    #[error("matrix is singular: no usable pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("solver breakdown after {iterations} iterations (residual norm {residual_norm:e})")]
    Breakdown {
        iterations: usize,
        residual_norm: f64,
    },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("allocation of {0} elements failed")]
    Resource(usize),
}

impl Error {
    pub(crate) fn dimension(
        op: &'static str,
        expected: impl std::fmt::Display,
        actual: impl std::fmt::Display,
    ) -> Self {
        Error::Dimension {
            op,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
