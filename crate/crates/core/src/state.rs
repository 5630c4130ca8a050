//! Bipartite states: validated density matrices and pure states, partial
//! trace and transpose, regrouped tensor powers, Schmidt decomposition and
//! entropies.
//!
//! Joint basis index convention: `i_a * dim_b + i_b` (A-major). For `n`
//! copies the natural Kronecker order is `A1 B1 A2 B2 … An Bn`; tensor powers
//! are regrouped to `A1 … An : B1 … Bn` so that the result is again a
//! bipartite state with shape `(dim_a^n, dim_b^n)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, hermitian_eig, kron_vec, norm, svd, ComplexMatrix, C64, DEFAULT_SIZE_CAP};
use crate::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Schmidt coefficients at or below this are dropped.
pub const SCHMIDT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteShape {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteShape {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a < 2 || dim_b < 2 {
            return Err(Error::InvalidShape { dim_a, dim_b });
        }
        Ok(Self { dim_a, dim_b })
    }

    pub const fn qubits() -> Self {
        Self { dim_a: 2, dim_b: 2 }
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dim(&self, sys: Subsystem) -> usize {
        match sys {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }

    /// Shape of `n` copies under the `A…A : B…B` cut.
    pub fn power(&self, n: usize) -> Result<Self> {
        let dim_a = checked_pow(self.dim_a, n)?;
        let dim_b = checked_pow(self.dim_b, n)?;
        if dim_a.checked_mul(dim_b).is_none_or(|t| t > DEFAULT_SIZE_CAP) {
            return Err(linalg::LinalgError::SizeOverflow {
                requested: dim_a.saturating_mul(dim_b),
                cap: DEFAULT_SIZE_CAP,
            }
            .into());
        }
        Ok(Self { dim_a, dim_b })
    }
}

fn checked_pow(base: usize, n: usize) -> Result<usize> {
    base.checked_pow(n as u32).filter(|&d| d <= DEFAULT_SIZE_CAP).ok_or_else(|| {
        linalg::LinalgError::SizeOverflow { requested: usize::MAX, cap: DEFAULT_SIZE_CAP }.into()
    })
}

impl fmt::Display for BipartiteShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.dim_a, self.dim_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Which density-matrix invariant a validation failure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Invariant {
    Dimension,
    Hermiticity,
    Trace,
    Positivity,
    Norm,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::Dimension => "matrix dimension does not match the bipartite shape",
            Invariant::Hermiticity => "matrix is not Hermitian",
            Invariant::Trace => "trace deviates from 1",
            Invariant::Positivity => "matrix has a negative eigenvalue",
            Invariant::Norm => "state norm deviates from 1",
        })
    }
}

/// Hermitian, unit-trace, positive semidefinite operator on `A ⊗ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    shape: BipartiteShape,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(shape: BipartiteShape, matrix: ComplexMatrix) -> Result<Self> {
        let d = shape.total();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::InvalidState {
                invariant: Invariant::Dimension,
                magnitude: (matrix.rows().max(matrix.cols())) as f64,
            });
        }
        let herm = matrix.hermitian_deviation();
        if !(herm < HERMITIAN_TOL) {
            return Err(Error::InvalidState { invariant: Invariant::Hermiticity, magnitude: herm });
        }
        let trace_dev = (matrix.trace().re - 1.0).abs();
        if !(trace_dev < TRACE_TOL) {
            return Err(Error::InvalidState { invariant: Invariant::Trace, magnitude: trace_dev });
        }
        let min_eig = hermitian_eig(&matrix)?.eigenvalues.last().copied().unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState { invariant: Invariant::Positivity, magnitude: -min_eig });
        }
        Ok(Self { shape, matrix })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let matrix = ComplexMatrix::outer(&psi.amplitudes, &psi.amplitudes);
        Self { shape: psi.shape, matrix }
    }

    pub fn maximally_mixed(shape: BipartiteShape) -> Self {
        let d = shape.total();
        Self { shape, matrix: ComplexMatrix::identity(d).scale(1.0 / d as f64) }
    }

    pub fn shape(&self) -> BipartiteShape {
        self.shape
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.shape.total()
    }

    /// Eigenvalues in descending order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.matrix)?.eigenvalues)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(&self.matrix)
    }

    pub fn reduced(&self, keep: Subsystem) -> ComplexMatrix {
        partial_trace(self, keep)
    }
}

/// Unit vector on `A ⊗ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    shape: BipartiteShape,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(shape: BipartiteShape, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != shape.total() {
            return Err(Error::InvalidState {
                invariant: Invariant::Dimension,
                magnitude: amplitudes.len() as f64,
            });
        }
        let dev = (norm(&amplitudes) - 1.0).abs();
        if !(dev < NORM_TOL) {
            return Err(Error::InvalidState { invariant: Invariant::Norm, magnitude: dev });
        }
        Ok(Self { shape, amplitudes })
    }

    /// Normalizes `amplitudes` first; fails only on a zero vector or wrong length.
    pub fn normalized(shape: BipartiteShape, amplitudes: Vec<C64>) -> Result<Self> {
        let unit = linalg::normalized(&amplitudes)
            .ok_or(Error::InvalidState { invariant: Invariant::Norm, magnitude: 1.0 })?;
        Self::new(shape, unit)
    }

    /// `|a⟩ ⊗ |b⟩` after normalizing both factors.
    pub fn product(a: &[C64], b: &[C64]) -> Result<Self> {
        let shape = BipartiteShape::new(a.len(), b.len())?;
        let a = linalg::normalized(a).ok_or(Error::InvalidState { invariant: Invariant::Norm, magnitude: 1.0 })?;
        let b = linalg::normalized(b).ok_or(Error::InvalidState { invariant: Invariant::Norm, magnitude: 1.0 })?;
        Self::normalized(shape, kron_vec(&a, &b))
    }

    /// Computational basis state `|i⟩|j⟩`.
    pub fn basis(shape: BipartiteShape, i: usize, j: usize) -> Self {
        let mut amps = vec![linalg::ZERO; shape.total()];
        amps[i * shape.dim_b + j] = linalg::ONE;
        Self { shape, amplitudes: amps }
    }

    pub fn shape(&self) -> BipartiteShape {
        self.shape
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// Amplitudes as a `dim_a × dim_b` matrix.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.shape.dim_a, self.shape.dim_b, |i, j| {
            self.amplitudes[i * self.shape.dim_b + j]
        })
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

/// Schmidt decomposition `|ψ⟩ = Σ_k s_k |a_k⟩|b_k⟩`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub a_vectors: Vec<Vec<C64>>,
    pub b_vectors: Vec<Vec<C64>>,
}

impl SchmidtForm {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self) -> Vec<C64> {
        let dim = self.a_vectors.first().map_or(0, Vec::len) * self.b_vectors.first().map_or(0, Vec::len);
        let mut out = vec![linalg::ZERO; dim];
        for ((s, a), b) in self.coefficients.iter().zip(&self.a_vectors).zip(&self.b_vectors) {
            for (o, x) in out.iter_mut().zip(kron_vec(a, b)) {
                *o += x * *s;
            }
        }
        out
    }
}

/// Eigenvalues at or below this are treated as outside the support.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Spectral decomposition `σ = Σ λ_i |Φ_i⟩⟨Φ_i|` restricted to nonzero
/// eigenvalues, in descending order.
///
/// Families with a known eigenbasis (Bell mixtures) supply it directly;
/// otherwise [`EigenEnsemble::of`] takes the eigensolver's basis, which is
/// not unique when eigenvalues are degenerate.
#[derive(Debug, Clone)]
pub struct EigenEnsemble {
    shape: BipartiteShape,
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl EigenEnsemble {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        let eig = hermitian_eig(&rho.matrix)?;
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > EIGEN_FLOOR {
                weights.push(lambda);
                states.push(PureState::normalized(rho.shape, eig.eigenvector(k))?);
            }
        }
        Ok(Self { shape: rho.shape, weights, states })
    }

    /// Builds from declared `(λ_i, |Φ_i⟩)` pairs. Zero weights are dropped;
    /// the states must be orthonormal within `1e-10`.
    pub fn from_pairs(pairs: Vec<(f64, PureState)>) -> Result<Self> {
        let shape = pairs.first().map(|p| p.1.shape).ok_or(Error::WeightSumInvalid { sum: 0.0 })?;
        let mut kept: Vec<(f64, PureState)> = Vec::new();
        let mut sum = 0.0;
        for (w, psi) in pairs {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidWeight(w));
            }
            if psi.shape != shape {
                return Err(Error::ShapeMismatch { expected: shape.to_string(), found: psi.shape.to_string() });
            }
            sum += w;
            if w > EIGEN_FLOOR {
                kept.push((w, psi));
            }
        }
        if !((sum - 1.0).abs() < WEIGHT_SUM_TOL) {
            return Err(Error::WeightSumInvalid { sum });
        }
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                let overlap = linalg::inner(&a.1.amplitudes, &b.1.amplitudes).norm();
                if overlap > 1e-10 {
                    return Err(Error::NotOrthogonal { deviation: overlap });
                }
            }
        }
        // stable: equal weights keep declaration order
        kept.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (weights, states) = kept.into_iter().unzip();
        Ok(Self { shape, weights, states })
    }

    pub fn shape(&self) -> BipartiteShape {
        self.shape
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// `S(σ)` in bits, from the weights.
    pub fn entropy(&self) -> f64 {
        shannon_entropy_bits(&self.weights)
    }

    /// `Ē = Σ λ_i E(Φ_i)` in bits.
    pub fn average_entanglement(&self) -> Result<f64> {
        let mut total = 0.0;
        for (w, psi) in self.weights.iter().zip(&self.states) {
            total += w * entanglement_entropy(psi)?;
        }
        Ok(total)
    }

    /// `Σ λ_i |Φ_i⟩⟨Φ_i|`, renormalized over the kept eigenvalues.
    pub fn density(&self) -> Result<DensityMatrix> {
        let total: f64 = self.weights.iter().sum();
        let pairs: Vec<(f64, PureState)> =
            self.weights.iter().map(|w| w / total).zip(self.states.iter().cloned()).collect();
        density_from_ensemble(&pairs)
    }

    /// Smallest gap between consecutive kept eigenvalues, `None` for rank 1.
    pub fn min_gap(&self) -> Option<f64> {
        self.weights.windows(2).map(|w| w[0] - w[1]).reduce(f64::min)
    }
}

/// `ρ = Σ p_i |ψ_i⟩⟨ψ_i|`.
pub fn density_from_ensemble(pairs: &[(f64, PureState)]) -> Result<DensityMatrix> {
    let first = pairs.first().ok_or(Error::WeightSumInvalid { sum: 0.0 })?;
    let shape = first.1.shape;
    let mut sum = 0.0;
    for (w, psi) in pairs {
        if !(w.is_finite() && *w > 0.0) {
            return Err(Error::InvalidWeight(*w));
        }
        if psi.shape != shape {
            return Err(Error::ShapeMismatch { expected: shape.to_string(), found: psi.shape.to_string() });
        }
        sum += w;
    }
    if !((sum - 1.0).abs() < WEIGHT_SUM_TOL) {
        return Err(Error::WeightSumInvalid { sum });
    }
    let d = shape.total();
    let mut m = ComplexMatrix::zeros(d, d);
    for (w, psi) in pairs {
        let a = &psi.amplitudes;
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += a[i] * a[j].conj() * *w;
            }
        }
    }
    DensityMatrix::new(shape, m)
}

/// Reduced operator on the kept subsystem.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> ComplexMatrix {
    partial_trace_op(&rho.matrix, rho.shape, keep)
}

pub fn partial_trace_op(m: &ComplexMatrix, shape: BipartiteShape, keep: Subsystem) -> ComplexMatrix {
    let (da, db) = (shape.dim_a, shape.dim_b);
    match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, k| (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |j, l| (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()),
    }
}

/// Transposes the indices of one subsystem. Pure entry permutation, so
/// applying it twice returns the input exactly.
pub fn partial_transpose(rho: &DensityMatrix, on: Subsystem) -> ComplexMatrix {
    partial_transpose_op(&rho.matrix, rho.shape, on)
}

pub fn partial_transpose_op(m: &ComplexMatrix, shape: BipartiteShape, on: Subsystem) -> ComplexMatrix {
    let (da, db) = (shape.dim_a, shape.dim_b);
    let d = da * db;
    ComplexMatrix::from_fn(d, d, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        match on {
            Subsystem::A => m[(k * db + j, i * db + l)],
            Subsystem::B => m[(i * db + l, k * db + j)],
        }
    })
}

/// `perm[regrouped] = natural`: maps an index in the `A1…An : B1…Bn` order
/// to the natural Kronecker index `A1 B1 … An Bn`.
pub fn regroup_permutation(shape: BipartiteShape, n: usize) -> Result<Vec<usize>> {
    let big = shape.power(n)?;
    let (da, db) = (shape.dim_a, shape.dim_b);
    let mut perm = Vec::with_capacity(big.total());
    for ra in 0..big.dim_a {
        for rb in 0..big.dim_b {
            let a_digits = digits(ra, da, n);
            let b_digits = digits(rb, db, n);
            let natural = a_digits.iter().zip(&b_digits).fold(0, |acc, (a, b)| acc * da * db + a * db + b);
            perm.push(natural);
        }
    }
    Ok(perm)
}

/// Most-significant digit first.
fn digits(mut x: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = x % base;
        x /= base;
    }
    out
}

/// `|v_1⟩ ⊗ … ⊗ |v_n⟩` of joint vectors on `A ⊗ B`, regrouped to the
/// `A…A : B…B` cut.
pub fn regrouped_tensor_product(factors: &[&[C64]], shape: BipartiteShape) -> Result<Vec<C64>> {
    let n = factors.len();
    let perm = regroup_permutation(shape, n)?;
    let natural = factors.iter().skip(1).fold(factors[0].to_vec(), |acc, f| kron_vec(&acc, f));
    Ok(perm.iter().map(|&p| natural[p]).collect())
}

/// `ρ^⊗n` on the regrouped cut, shape `(dim_a^n, dim_b^n)`.
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::ParamOutOfRange { name: "n".into(), value: 0.0, domain: ">= 1".into() });
    }
    let shape = rho.shape.power(n)?;
    let perm = regroup_permutation(rho.shape, n)?;
    let mut natural = rho.matrix.clone();
    for _ in 1..n {
        natural = natural.kron(&rho.matrix)?;
    }
    let matrix = ComplexMatrix::from_fn(shape.total(), shape.total(), |r, c| natural[(perm[r], perm[c])]);
    Ok(DensityMatrix { shape, matrix })
}

pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtForm> {
    let s = svd(&psi.coefficient_matrix())?;
    let mut form = SchmidtForm { coefficients: Vec::new(), a_vectors: Vec::new(), b_vectors: Vec::new() };
    for (k, &c) in s.singular_values.iter().enumerate() {
        if c <= SCHMIDT_TOL {
            continue;
        }
        form.coefficients.push(c);
        form.a_vectors.push(s.u.column(k));
        form.b_vectors.push(s.v.column(k).iter().map(|z| z.conj()).collect());
    }
    Ok(form)
}

/// Entropy of entanglement in bits.
pub fn entanglement_entropy(psi: &PureState) -> Result<f64> {
    let form = schmidt_decompose(psi)?;
    let probs: Vec<f64> = form.coefficients.iter().map(|c| c * c).collect();
    Ok(shannon_entropy_bits(&probs))
}

/// `−Σ p log2 p` with `0·log 0 = 0`; nonpositive entries are skipped.
pub fn shannon_entropy_bits(probs: &[f64]) -> f64 {
    let h: f64 = probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    h.max(0.0)
}

pub fn von_neumann_entropy(m: &ComplexMatrix) -> Result<f64> {
    Ok(shannon_entropy_bits(&hermitian_eig(m)?.eigenvalues))
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy_bits(&[p, 1.0 - p])
}
