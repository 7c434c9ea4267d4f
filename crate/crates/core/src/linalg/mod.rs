//! Dense complex Hermitian linear algebra: Cholesky factors, a cyclic Jacobi
//! eigensolver and the generalized eigenproblem through whitening.

mod cholesky;
mod generalized;
mod jacobi;
mod matrix;

use thiserror::Error;

pub use cholesky::{cholesky_sqrt, LowerTriangularFactor};
pub use generalized::{generalized_eig, GenEigenDecomposition};
pub use jacobi::{hermitian_eig, HermitianEigen, MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub use matrix::{dot, norm, HermitianMatrix, Matrix, C64, HERMITIAN_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian at ({row}, {col})")]
    NotHermitian { row: usize, col: usize },
    #[error("matrix flagged real has an imaginary entry at ({row}, {col})")]
    NotReal { row: usize, col: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected {expected} entries, found {found}")]
    BadLength { expected: usize, found: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
}
