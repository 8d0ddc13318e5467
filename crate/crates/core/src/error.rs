use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {dim} outside supported range 1..={max}")]
    DimensionOutOfRange { dim: usize, max: usize },

    #[error("expected a grade-{expected} form, found grade {found}")]
    GradeMismatch { expected: usize, found: usize },

    #[error("form is not homogeneous")]
    Inhomogeneous,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("complex dimension must be in 1..=4, got {0}")]
    ModelDimension(usize),

    #[error("operation requires complex dimension {expected}, model has {found}")]
    WrongModelDimension { expected: usize, found: usize },

    #[error("phase (cos, sin) is not on the unit circle (residual {residual:e})")]
    InvalidPhase { residual: f64 },

    #[error("basis is not orthonormal (residual {residual:e})")]
    NonOrthonormal { residual: f64 },

    #[error("degenerate plane: rank {rank}, expected {expected}")]
    DegeneratePlane { rank: usize, expected: usize },

    #[error("vector is not of type {expected}")]
    WrongType { expected: &'static str },

    #[error("vector is not normal to the base plane (residual {residual:e})")]
    NotNormal { residual: f64 },

    #[error("seed norm {norm} is outside the graph radius {radius}")]
    OutsideRadius { norm: f64, radius: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("index is not an integer: {numerator}/{denominator}")]
    NonIntegral { numerator: i64, denominator: i64 },

    #[error("t-ladder must be strictly decreasing and positive")]
    BadLadder,

    #[error("only {survivors} ladder rungs above the roundoff floor; need at least 3")]
    LadderTooShort { survivors: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
