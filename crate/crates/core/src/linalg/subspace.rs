use super::matrix::{inner, norm, ComplexMatrix, C64};
use super::svd::svd;
use super::LinalgError;

/// Singular values at or below `DEFAULT_RANK_TOL × σ_max` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Number of singular values of the stacked vectors exceeding
/// `rel_tol × σ_max`. All-zero input has rank 0.
pub fn numerical_rank(vectors: &[Vec<C64>], rel_tol: f64) -> Result<usize, LinalgError> {
    if vectors.is_empty() {
        return Err(LinalgError::EmptyInput);
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(LinalgError::InvalidTolerance(rel_tol));
    }
    let stacked = ComplexMatrix::from_columns(vectors)?;
    let sv = svd(&stacked)?.singular_values;
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * smax).count())
}

/// Orthonormal basis of the span of `vectors` using the default rank
/// tolerance.
pub fn orthonormalize(vectors: &[Vec<C64>]) -> Vec<Vec<C64>> {
    orthonormalize_with_tol(vectors, DEFAULT_RANK_TOL)
}

/// Modified Gram-Schmidt with one reorthogonalization pass. A vector is
/// dropped when its residual is at most `rel_tol` times the largest input
/// norm.
pub fn orthonormalize_with_tol(vectors: &[Vec<C64>], rel_tol: f64) -> Vec<Vec<C64>> {
    let scale = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    if scale == 0.0 {
        return basis;
    }
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = inner(b, &r);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let nr = norm(&r);
        if nr > rel_tol * scale {
            r.iter_mut().for_each(|x| *x /= nr);
            basis.push(r);
        }
    }
    basis
}
