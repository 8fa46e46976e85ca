use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown variable `{name}` at line {line}, column {column}")]
    UnknownVariable {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("empty polynomial at line {line}")]
    EmptyPolynomial { line: usize },
    #[error("empty polynomial system")]
    EmptySystem,
    #[error("ambient dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {index} is zero but carries a negative exponent")]
    Domain { index: usize },
    #[error("need at least {needed} polynomials, have {available}")]
    TooFewPolynomials { needed: usize, available: usize },
    #[error("system is not square: {equations} equations in {variables} variables")]
    NotSquare { equations: usize, variables: usize },
    #[error("zero vector")]
    ZeroVector,
    #[error("vector is not primitive (content {content})")]
    NotPrimitive { content: String },
    #[error("basis rows are linearly dependent")]
    DependentRows,
    #[error("integer {0} does not fit in a machine word")]
    Overflow(String),
    #[error("curve is not balanced (defect {defect:?})")]
    Unbalanced { defect: Vec<i64> },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("ray {direction:?} is contracted to zero by the matrix")]
    ContractedRay { direction: Vec<i64> },
    #[error("result is indeterminate: {0}")]
    Indeterminate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
