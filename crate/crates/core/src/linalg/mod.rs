//! Small dense linear algebra.
//!
//! Everything here is sized for the stage-space matrices of an `s`-stage
//! method (s ≤ 5) and for the `m×m` / `sm×sm` Newton matrices of modest
//! test problems. No sparsity or blocking is attempted.

mod eigen;
mod factor;
mod matrix;
mod scalar;

pub use eigen::{eigenvalues, spectral_radius, MAX_EIGEN_DIM};
pub use factor::{crout_factor, lu_factor, CroutFactors, LuFactors, SINGULARITY_THRESHOLD};
pub use matrix::{CMatrix, Matrix};
pub use scalar::Scalar;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("zero pivot in Crout factorization at column {column} (|pivot| = {pivot:e})")]
    ZeroPivot { column: usize, pivot: f64 },
    #[error("eigenvalue iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix of dimension {0} exceeds the eigenvalue solver limit")]
    TooLarge(usize),
    #[error("non-finite matrix entry")]
    NonFinite,
}

/// Maximum absolute row sum.
pub fn inf_norm<T: Scalar>(a: &Matrix<T>) -> f64 {
    a.inf_norm()
}

/// `a^nu` by repeated multiplication; `nu = 0` gives the identity.
pub fn mat_power<T: Scalar>(a: &Matrix<T>, nu: usize) -> Result<Matrix<T>, LinalgError> {
    a.ensure_square()?;
    let mut out = Matrix::identity(a.rows());
    for _ in 0..nu {
        out = out.matmul(a);
    }
    Ok(out)
}
