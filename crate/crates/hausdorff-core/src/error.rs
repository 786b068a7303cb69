use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Arguments are individually valid but given in the wrong order.
    #[error("argument order: {0}")]
    ArgumentOrder(String),
    /// Vector/matrix shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// The operation only supports a specific ambient dimension.
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    /// A structural precondition on the input data is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Quadrature or ODE integration failed at a specific node.
    #[error("integration failure at node {node}: {message}")]
    Integration { node: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
