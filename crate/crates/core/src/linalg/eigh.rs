use super::matrix::{fix_phase, ComplexMatrix, C64, ZERO};
use super::LinalgError;

/// Accepted `‖A − A†‖_max` for input to [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Stop once the off-diagonal Frobenius norm falls below this fraction of
/// the full Frobenius norm.
pub const OFF_DIAGONAL_TARGET: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Real eigenvalues in descending order; ties keep the order in which
    /// the Jacobi iteration left them on the diagonal.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        scaled.matmul(&v.adjoint())
    }

    /// `‖V†V − I‖_max`.
    pub fn gram_deviation(&self) -> f64 {
        self.eigenvectors.unitarity_deviation()
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// The input is symmetrized as `(A + A†)/2` after the Hermiticity check.
/// Each eigenvector column has its largest entry made real and positive so
/// output is deterministic.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let deviation = a.hermitian_deviation();
    if !(deviation < HERMITIAN_TOL) {
        return Err(LinalgError::NotHermitian { deviation });
    }
    let n = a.rows();
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);

    let fro = m.frobenius_norm();
    let target = OFF_DIAGONAL_TARGET * fro;
    let skip_below = 1e-18 * fro;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g <= skip_below || g == 0.0 {
                    continue;
                }
                rotate(&mut m, &mut v, p, q, apq);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > target {
        return Err(LinalgError::ConvergenceFailure { routine: "hermitian_eig", sweeps: MAX_SWEEPS });
    }

    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their diagonal order
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut columns: Vec<Vec<C64>> = order.iter().map(|&i| v.column(i)).collect();
    columns.iter_mut().for_each(|c| fix_phase(c));
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| columns[j][i]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Applies `m ← U† m U`, `v ← v U` for the 2×2 unitary that zeroes `m[p][q]`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, apq: C64) {
    let n = m.rows();
    let g = apq.norm();
    let phase = apq.conj() / g; // e^{-iφ}
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;

    let tau = (aqq - app) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = phase * (-s);
    let u_qq = phase * c;

    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * u_pp + mkq * u_qp;
        m[(k, q)] = mkp * u_pq + mkq * u_qq;

        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = u_pp.conj() * mpk + u_qp.conj() * mqk;
        m[(q, k)] = u_pq.conj() * mpk + u_qq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
}
