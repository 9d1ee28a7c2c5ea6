use thiserror::Error;

/// Errors raised by the numerical kernels and the gauge-theory layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("matrix is not hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not idempotent (defect {defect:.3e})")]
    NotIdempotent { defect: f64 },

    #[error("basis matrix {index} is not traceless (|trace| = {trace:.3e})")]
    NotTraceless { index: usize, trace: f64 },

    #[error("basis matrices are linearly dependent (rank {rank}, expected {expected})")]
    LinearlyDependent { rank: usize, expected: usize },

    #[error("bracket of basis elements {i} and {j} leaves the span (residual {residual:.3e})")]
    NotClosed { i: usize, j: usize, residual: f64 },

    #[error("adjoint of basis element {index} leaves the span (residual {residual:.3e})")]
    NotStarClosed { index: usize, residual: f64 },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("exponent norm {norm:.3e} exceeds the accuracy guard {limit}")]
    GuardExceeded { norm: f64, limit: f64 },

    #[error("connection is not hermitian: gauge potential component {index} is not antihermitian")]
    NotHermitianConnection { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
