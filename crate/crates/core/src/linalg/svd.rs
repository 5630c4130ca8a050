use super::matrix::{inner, norm, ComplexMatrix, C64, ZERO};
use super::LinalgError;

const MAX_SVD_SWEEPS: usize = 100;

/// Thin singular value decomposition `A = U Σ V†` with `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows × k`, orthonormal columns.
    pub u: ComplexMatrix,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// `cols × k`, orthonormal columns.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = &self.u;
        let scaled = ComplexMatrix::from_fn(u.rows(), u.cols(), |i, j| u[(i, j)] * self.singular_values[j]);
        scaled.matmul(&self.v.adjoint())
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    if a.rows() >= a.cols() {
        tall_svd(a)
    } else {
        let t = tall_svd(&a.adjoint())?;
        Ok(Svd { u: t.v, singular_values: t.singular_values, v: t.u })
    }
}

fn tall_svd(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    let m = a.rows();
    let n = a.cols();
    let mut w = a.columns();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { C64::new(1.0, 0.0) } else { ZERO }).collect())
        .collect();

    let eps = 1e-15;
    // columns below this squared norm are numerically zero and left alone
    let negligible = (eps * a.frobenius_norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..MAX_SVD_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha: f64 = w[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w[j].iter().map(|z| z.norm_sqr()).sum();
                let gamma = inner(&w[i], &w[j]);
                let g = gamma.norm();
                if alpha <= negligible || beta <= negligible || g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, i, j, c, s, phase);
                rotate_pair(&mut v, i, j, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::ConvergenceFailure { routine: "svd", sweeps: MAX_SVD_SWEEPS });
    }

    let sigma: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let smax = order.first().map_or(0.0, |&i| sigma[i]);
    let floor = smax * 1e-13;
    let mut u_cols: Vec<Option<Vec<C64>>> = order
        .iter()
        .map(|&k| (sigma[k] > floor && sigma[k] > 0.0).then(|| w[k].iter().map(|z| z / sigma[k]).collect()))
        .collect();
    complete_orthonormal(&mut u_cols, m);

    let u_cols: Vec<Vec<C64>> = u_cols.into_iter().map(Option::unwrap).collect();
    let u = ComplexMatrix::from_fn(m, n, |i, j| u_cols[j][i]);
    let vm = ComplexMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    Ok(Svd { u, singular_values: order.iter().map(|&k| sigma[k]).collect(), v: vm })
}

fn rotate_pair(cols: &mut [Vec<C64>], i: usize, j: usize, c: f64, s: f64, phase: C64) {
    let (left, right) = cols.split_at_mut(j);
    let ci = &mut left[i];
    let cj = &mut right[0];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let yt = *y * phase;
        let xi = *x;
        *x = xi * c - yt * s;
        *y = xi * s + yt * c;
    }
}

/// Fills `None` slots with unit vectors orthogonal to every other column.
fn complete_orthonormal(cols: &mut [Option<Vec<C64>>], dim: usize) {
    for slot in 0..cols.len() {
        if cols[slot].is_some() {
            continue;
        }
        for e in 0..dim {
            let mut cand = vec![ZERO; dim];
            cand[e] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for other in cols.iter().flatten() {
                    let proj = inner(other, &cand);
                    cand.iter_mut().zip(other).for_each(|(c, o)| *c -= proj * o);
                }
            }
            let nrm = norm(&cand);
            if nrm > 0.5 {
                cols[slot] = Some(cand.iter().map(|z| z / nrm).collect());
                break;
            }
        }
    }
}
