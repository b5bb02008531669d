use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spline order {order}")]
    InvalidOrder { order: usize },

    #[error("invalid spline space: order {order}, {cells} cells ({reason})")]
    InvalidSpace {
        order: usize,
        cells: usize,
        reason: &'static str,
    },

    #[error("cannot differentiate a piecewise-constant spline")]
    CannotDifferentiate,

    #[error("derivative order {derivative} out of range for spline order {order}")]
    OrderUnderflow { derivative: usize, order: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("stencil with {lags} lags aliases in dimension {dim}")]
    StencilOverlap { lags: usize, dim: usize },

    #[error("circulant matrix is not symmetric (imaginary residue {residue:e})")]
    NotSymmetric { residue: f64 },

    #[error("singular circulant matrix (min |eigenvalue| = {min_abs_eigenvalue:e})")]
    Singular { min_abs_eigenvalue: f64 },

    #[error("solve residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTolerance { residual: f64, tol: f64 },

    #[error("degenerate spectrum: lambda_min = {lambda_min}, lambda_max = {lambda_max}")]
    DegenerateSpectrum { lambda_min: f64, lambda_max: f64 },

    #[error("matrix is not positive definite (lambda_min = {lambda_min:e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("symbol lattice tail cannot reach {tail_tol:e} for order {order} within {max_terms} terms")]
    TailTolerance {
        order: usize,
        tail_tol: f64,
        max_terms: usize,
    },

    #[error("dimension {dim} exceeds the dense limit {max}")]
    SizeLimit { dim: usize, max: usize },

    #[error("test function '{label}' is not 1-periodic (|u(0) - u(1)| = {mismatch:e})")]
    NonPeriodic { label: String, mismatch: f64 },

    #[error("test function '{label}' has no derivative of order {derivative}")]
    MissingDerivative { label: String, derivative: usize },

    #[error("quadrature needs at least {min} nodes per cell, got {got}")]
    TooFewNodes { got: usize, min: usize },

    #[error("at least {min} samples per cell required, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("negative argument: {0}")]
    NegativeArgument(&'static str),

    #[error("order mismatch: coefficients for order {coefficients}, space of order {space}")]
    OrderMismatch { coefficients: usize, space: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
