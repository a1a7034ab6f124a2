use thiserror::Error;

/// Errors raised while building, parsing or evaluating a function model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("coefficient {literal} at {line}:{column} is not a strictly positive finite number")]
    NonPositiveCoefficient {
        literal: String,
        line: usize,
        column: usize,
    },
    #[error("coefficient {0} is not a strictly positive finite number")]
    InvalidCoefficient(String),
    #[error("geo weights sum to {sum}, expected 1")]
    GeoWeights { sum: f64 },
    #[error("variable x{index} out of range for dimension {dim}")]
    VarOutOfRange { index: usize, dim: usize },
    #[error("{0} node needs at least one child")]
    EmptyNode(&'static str),
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {0} is defined more than once")]
    DuplicateCoordinate(usize),
    #[error("coordinate {0} is not defined")]
    MissingCoordinate(usize),
    #[error("coordinate {index} of the point is not finite")]
    NonFinite { index: usize },
    #[error("coordinate {index} of the point is not strictly positive")]
    NonPositive { index: usize },
    #[error("point is empty")]
    EmptyPoint,
}

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("iteration {iteration} produced a non-finite value")]
    NonFinite { iteration: usize },
    #[error("precondition violated at coordinate {coordinate}: excess {excess:e}")]
    Precondition { coordinate: usize, excess: f64 },
    #[error("bisection bracket could not be established for edge {from} -> {to}")]
    Bracket { from: usize, to: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
