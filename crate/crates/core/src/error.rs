use thiserror::Error;

/// Errors produced by mesh construction, discretisation, assembly and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no quadrature rule of degree {requested} (supported: 1..={max})")]
    UnsupportedDegree { requested: usize, max: usize },

    #[error("invalid coefficient matrix: {0}")]
    InvalidCoefficient(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("{method} failed after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
