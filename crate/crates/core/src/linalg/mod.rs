//! Dense complex linear algebra for small operators (dimension up to a few
//! hundred): Hermitian eigendecomposition by cyclic Jacobi rotations,
//! one-sided Jacobi SVD, numerical rank and orthonormalization.

mod eigh;
mod matrix;
mod subspace;
mod svd;

pub use eigh::{hermitian_eig, EigenDecomposition, HERMITIAN_TOL, MAX_SWEEPS, OFF_DIAGONAL_TARGET};
pub use matrix::{
    fix_phase, inner, kron_vec, norm, normalized, ComplexMatrix, C64, DEFAULT_SIZE_CAP, ONE, ZERO,
};
pub use subspace::{numerical_rank, orthonormalize, orthonormalize_with_tol, DEFAULT_RANK_TOL};
pub use svd::{svd, Svd};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("{routine} did not converge after {sweeps} sweeps")]
    ConvergenceFailure { routine: &'static str, sweeps: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("result dimension {requested} exceeds the size cap {cap}")]
    SizeOverflow { requested: usize, cap: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("relative tolerance {0} outside (0, 1)")]
    InvalidTolerance(f64),
}
