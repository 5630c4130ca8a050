//! Product vectors inside subspaces.
//!
//! A seesaw search looks for unit `a ⊗ b` in the span of an orthonormal basis.
//! Results feed two checks: whether the range of `σ^⊗n` (or its typical part)
//! is spanned by product vectors, and whether the eigen-strings of `σ^⊗n`
//! are a unitary rotation of an orthogonal product basis, which yields an
//! explicit separable decomposition.
//!
//! Failing to find product vectors is a statement about the search, not a
//! proof that none exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::Tolerances;
use crate::linalg::{fix_phase, hermitian_eig, inner, kron_vec, norm, numerical_rank, orthonormalize_with_tol, ComplexMatrix, C64, ZERO};
use crate::state::{
    regroup_permutation, shannon_entropy_bits, von_neumann_entropy, BipartiteShape, DensityMatrix, EigenEnsemble,
    PureState, Subsystem,
};
use crate::typicality::{enumerate_for_ensemble, multiset_permutations};
use crate::zoo::random_unit_vector;
use crate::{Error, Result};

pub const DEFAULT_RESTARTS: usize = 64;
pub const MAX_ITERATIONS: usize = 500;
/// Stop a restart once the overlap moves by less than this per iteration.
pub const CHANGE_TOL: f64 = 1e-12;
/// A restart is accepted when `1 − overlap` is below this.
pub const ACCEPT_GAP: f64 = 1e-9;
/// Independent membership check on `‖(I − P)(a⊗b)‖`.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Joint vectors with fidelity above this are the same member.
pub const DEDUP_FIDELITY: f64 = 1.0 - 1e-6;
pub const UNITARITY_TOL: f64 = 1e-8;
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Required agreement between a product decomposition and its target.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
const BASIS_TOL: f64 = 1e-12;

/// Subspace of `A ⊗ B` given by an orthonormal basis.
#[derive(Debug, Clone)]
pub struct SubspaceSpec {
    shape: BipartiteShape,
    basis: Vec<Vec<C64>>,
}

impl SubspaceSpec {
    /// `basis` must be orthonormal within `1e-12`.
    pub fn new(shape: BipartiteShape, basis: Vec<Vec<C64>>) -> Result<Self> {
        let d = shape.total();
        if let Some(v) = basis.iter().find(|v| v.len() != d) {
            return Err(Error::ShapeMismatch { expected: format!("length {d}"), found: format!("length {}", v.len()) });
        }
        let mut deviation = 0.0f64;
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((inner(u, v) - C64::new(target, 0.0)).norm());
            }
        }
        if deviation > BASIS_TOL {
            return Err(Error::NotOrthogonal { deviation });
        }
        Ok(Self { shape, basis })
    }

    /// Span of arbitrary vectors, orthonormalized with relative tolerance
    /// `rank_tol`.
    pub fn from_vectors(shape: BipartiteShape, vectors: &[Vec<C64>], rank_tol: f64) -> Result<Self> {
        Self::new(shape, orthonormalize_with_tol(vectors, rank_tol))
    }

    /// Range of `σ`, spanned by its eigenvectors.
    pub fn range_of(ens: &EigenEnsemble) -> Self {
        let basis = ens.states().iter().map(|s| s.amplitudes().to_vec()).collect();
        Self { shape: ens.shape(), basis }
    }

    /// Range of `σ^⊗n` on the regrouped cut.
    pub fn range_of_power(ens: &EigenEnsemble, n: usize) -> Result<Self> {
        let strings = power_strings(ens, n)?;
        Ok(Self { shape: ens.shape().power(n)?, basis: strings.into_iter().map(|(_, v)| v).collect() })
    }

    pub fn shape(&self) -> BipartiteShape {
        self.shape
    }

    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn projector(&self) -> ComplexMatrix {
        let d = self.shape.total();
        let mut p = ComplexMatrix::zeros(d, d);
        for e in &self.basis {
            for i in 0..d {
                for j in 0..d {
                    p[(i, j)] += e[i] * e[j].conj();
                }
            }
        }
        p
    }

    /// `P v`.
    pub fn project(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for e in &self.basis {
            let c = inner(e, v);
            out.iter_mut().zip(e).for_each(|(o, x)| *o += c * x);
        }
        out
    }

    /// `⟨v|P|v⟩`.
    pub fn overlap(&self, v: &[C64]) -> f64 {
        self.basis.iter().map(|e| inner(e, v).norm_sqr()).sum()
    }

    /// `‖(I − P) v‖`.
    pub fn residual(&self, v: &[C64]) -> f64 {
        let pv = self.project(v);
        let diff: Vec<C64> = v.iter().zip(&pv).map(|(x, y)| x - y).collect();
        norm(&diff)
    }
}

/// All `r^n` eigen-strings of `σ^⊗n`, regrouped, with their probabilities,
/// in lexicographic order of eigenstate indices.
pub fn power_strings(ens: &EigenEnsemble, n: usize) -> Result<Vec<(f64, Vec<C64>)>> {
    if n == 0 {
        return Err(Error::ParamOutOfRange { name: "n".into(), value: 0.0, domain: ">= 1".into() });
    }
    let perm = regroup_permutation(ens.shape(), n)?;
    let r = ens.rank();
    let total = r.checked_pow(n as u32).filter(|&t| t <= perm.len()).ok_or(crate::LinalgError::SizeOverflow {
        requested: usize::MAX,
        cap: perm.len(),
    })?;
    let (weights, states) = (ens.weights(), ens.states());
    Ok((0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut slots = vec![0; n];
            for k in (0..n).rev() {
                slots[k] = idx % r;
                idx /= r;
            }
            let p: f64 = slots.iter().map(|&s| weights[s]).product();
            let natural = slots[1..]
                .iter()
                .fold(states[slots[0]].amplitudes().to_vec(), |acc, &s| kron_vec(&acc, states[s].amplitudes()));
            (p, perm.iter().map(|&q| natural[q]).collect())
        })
        .collect())
}

/// One seesaw run from a seeded random start.
#[derive(Debug, Clone, Serialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub overlap: f64,
    pub iterations: usize,
    /// Overlap after every half-step.
    pub trace: Vec<f64>,
}

/// Maximizes `⟨x⊗y|P|x⊗y⟩` over unit `x` with `y` fixed, or over `y` with
/// `x` fixed when `over_a` is false. When the maximum is degenerate the
/// maximizer closest to `current` is returned.
fn best_factor(sub: &SubspaceSpec, fixed: &[C64], current: &[C64], over_a: bool) -> Result<(Vec<C64>, f64)> {
    let (da, db) = (sub.shape.dim_a, sub.shape.dim_b);
    let dim = if over_a { da } else { db };
    let mut m = ComplexMatrix::zeros(dim, dim);
    for e in &sub.basis {
        let u: Vec<C64> = (0..dim)
            .map(|i| {
                if over_a {
                    (0..db).map(|j| e[i * db + j] * fixed[j].conj()).sum()
                } else {
                    (0..da).map(|k| e[k * db + i] * fixed[k].conj()).sum()
                }
            })
            .collect();
        for i in 0..dim {
            for j in i..dim {
                m[(i, j)] += u[i] * u[j].conj();
            }
        }
    }
    for i in 0..dim {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..dim {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    let eig = hermitian_eig(&m)?;
    let top = eig.eigenvalues[0];
    let cutoff = top - 1e-10 * top.abs().max(1.0);
    let degenerate = eig.eigenvalues.iter().take_while(|&&l| l >= cutoff).count();
    if degenerate > 1 {
        let mut proj = vec![ZERO; dim];
        for k in 0..degenerate {
            let v = eig.eigenvector(k);
            let c = inner(&v, current);
            proj.iter_mut().zip(&v).for_each(|(p, x)| *p += c * x);
        }
        if norm(&proj) > 1e-6 {
            if let Some(v) = crate::linalg::normalized(&proj) {
                return Ok((v, top));
            }
        }
    }
    Ok((eig.eigenvector(0), top))
}

/// Runs restart `restart` of a search seeded with `seed`. The random stream
/// depends only on `(seed, restart)`.
pub fn seesaw_restart(sub: &SubspaceSpec, seed: u64, restart: usize) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let mut a = random_unit_vector(&mut rng, sub.shape.dim_a);
    let mut b = random_unit_vector(&mut rng, sub.shape.dim_b);
    let mut trace = Vec::new();
    let mut overlap = f64::NEG_INFINITY;
    let mut iterations = 0;
    if sub.dim() == 0 {
        return Ok(RestartOutcome { restart, a, b, overlap: 0.0, iterations, trace });
    }
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (new_a, oa) = best_factor(sub, &b, &a, true)?;
        a = new_a;
        trace.push(oa);
        let (new_b, ob) = best_factor(sub, &a, &b, false)?;
        b = new_b;
        trace.push(ob);
        let change = (ob - overlap).abs();
        overlap = ob;
        if change < CHANGE_TOL {
            break;
        }
    }
    fix_phase(&mut a);
    fix_phase(&mut b);
    let overlap = sub.overlap(&kron_vec(&a, &b));
    Ok(RestartOutcome { restart, a, b, overlap, iterations, trace })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductMember {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub overlap: f64,
    /// `‖(I − P)(a⊗b)‖`, recomputed from the basis after the search.
    pub residual: f64,
}

impl ProductMember {
    pub fn joint(&self) -> Vec<C64> {
        kron_vec(&self.a, &self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchStats {
    pub restarts: usize,
    /// Restarts that passed both acceptance checks, before deduplication.
    pub accepted: usize,
    pub best_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductVectorFamily {
    pub shape: BipartiteShape,
    pub members: Vec<ProductMember>,
    /// Numerical rank of the joint vectors.
    pub independent_count: usize,
    pub stats: SearchStats,
}

impl ProductVectorFamily {
    /// Family from explicit factors, scored against `sub`.
    pub fn from_products(sub: &SubspaceSpec, pairs: Vec<(Vec<C64>, Vec<C64>)>, tol: &Tolerances) -> Result<Self> {
        let mut members = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let (a, b) = (unit(a)?, unit(b)?);
            let joint = kron_vec(&a, &b);
            if joint.len() != sub.shape.total() || a.len() != sub.shape.dim_a {
                return Err(Error::ShapeMismatch {
                    expected: sub.shape.to_string(),
                    found: format!("{}x{}", a.len(), b.len()),
                });
            }
            members.push(ProductMember { overlap: sub.overlap(&joint), residual: sub.residual(&joint), a, b });
        }
        let best_overlap = members.iter().map(|m| m.overlap).fold(0.0, f64::max);
        let accepted = members.len();
        Self::assemble(sub.shape, members, SearchStats { restarts: 0, accepted, best_overlap }, tol)
    }

    fn assemble(shape: BipartiteShape, members: Vec<ProductMember>, stats: SearchStats, tol: &Tolerances) -> Result<Self> {
        let independent_count = if members.is_empty() {
            0
        } else {
            let joints: Vec<Vec<C64>> = members.iter().map(ProductMember::joint).collect();
            numerical_rank(&joints, tol.rank)?
        };
        Ok(Self { shape, members, independent_count, stats })
    }

    pub fn joint_vectors(&self) -> Vec<Vec<C64>> {
        self.members.iter().map(ProductMember::joint).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.members.iter().map(|m| m.residual).fold(0.0, f64::max)
    }

    /// Greedy pairwise-orthogonal subfamily, keeping members in order.
    pub fn orthogonal_subfamily(&self, tol: &Tolerances) -> Result<Self> {
        let mut kept: Vec<ProductMember> = Vec::new();
        for m in &self.members {
            let j = m.joint();
            if kept.iter().all(|k| inner(&k.joint(), &j).norm() <= ORTHOGONALITY_TOL) {
                kept.push(m.clone());
            }
        }
        Self::assemble(self.shape, kept, self.stats.clone(), tol)
    }
}

fn unit(v: Vec<C64>) -> Result<Vec<C64>> {
    crate::linalg::normalized(&v).ok_or(Error::InvalidState { invariant: crate::state::Invariant::Norm, magnitude: 1.0 })
}

fn dominant_index(v: &[C64]) -> usize {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    best
}

/// Seesaw search with `restarts` independent seeded restarts.
///
/// Accepted members are sorted by the position of their dominant entry (then
/// by restart) before deduplication, so the result does not depend on the
/// order in which restarts finish.
pub fn seesaw_product_search(sub: &SubspaceSpec, restarts: usize, seed: u64, tol: &Tolerances) -> Result<ProductVectorFamily> {
    if restarts == 0 {
        return Err(Error::ParamOutOfRange { name: "restarts".into(), value: 0.0, domain: ">= 1".into() });
    }
    let outcomes: Vec<RestartOutcome> =
        (0..restarts).into_par_iter().map(|r| seesaw_restart(sub, seed, r)).collect::<Result<_>>()?;
    let best_overlap = outcomes.iter().map(|o| o.overlap).fold(0.0, f64::max);
    let mut accepted: Vec<(usize, usize, ProductMember)> = outcomes
        .into_iter()
        .filter(|o| 1.0 - o.overlap < ACCEPT_GAP)
        .filter_map(|o| {
            let joint = kron_vec(&o.a, &o.b);
            let residual = sub.residual(&joint);
            (residual < RESIDUAL_TOL)
                .then(|| (dominant_index(&joint), o.restart, ProductMember { a: o.a, b: o.b, overlap: o.overlap, residual }))
        })
        .collect();
    let count = accepted.len();
    accepted.sort_by_key(|(dom, restart, _)| (*dom, *restart));
    let mut members: Vec<ProductMember> = Vec::new();
    let mut joints: Vec<Vec<C64>> = Vec::new();
    for (_, _, m) in accepted {
        let j = m.joint();
        if joints.iter().all(|k| inner(k, &j).norm_sqr() <= DEDUP_FIDELITY) {
            joints.push(j);
            members.push(m);
        }
    }
    ProductVectorFamily::assemble(sub.shape, members, SearchStats { restarts, accepted: count, best_overlap }, tol)
}

/// Result of checking whether a subspace is spanned by found product vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanCheck {
    pub dimension: usize,
    pub independent_count: usize,
    pub product_spanned: bool,
    pub best_overlap: f64,
    pub max_residual: f64,
    pub family: ProductVectorFamily,
}

impl SpanCheck {
    pub fn run(sub: &SubspaceSpec, restarts: usize, seed: u64, tol: &Tolerances) -> Result<Self> {
        let family = seesaw_product_search(sub, restarts, seed, tol)?;
        Ok(Self {
            dimension: sub.dim(),
            independent_count: family.independent_count,
            product_spanned: family.independent_count == sub.dim() && sub.dim() > 0,
            best_overlap: family.stats.best_overlap,
            max_residual: family.max_residual(),
            family,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpbsReport {
    pub n: usize,
    /// `rank(σ^⊗n)`.
    pub rank: usize,
    /// Independent product vectors found in the range of `σ^⊗n`.
    pub lower_bound: usize,
    pub product_spanned: bool,
    /// `n·S(σ)`.
    pub n_entropy: f64,
    /// `n·Ē(σ)`.
    pub n_avg_entanglement: f64,
    /// `log2(lower_bound)/n − Ē`, clamped to `[0, S]`. A search-based
    /// estimate, not a computed invariant.
    pub implied_s_prime: f64,
    /// `S(σ_A^⊗n) = n·S(σ_A)`.
    pub local_entropy_a: f64,
    pub local_entropy_b: f64,
    /// `max(S(σ_A^⊗n), S(σ_B^⊗n)) ≤ log2(lower_bound) + 1e-6`; only
    /// meaningful when `product_spanned`.
    pub local_entropy_bound_holds: bool,
    pub best_overlap: f64,
    pub max_residual: f64,
    #[serde(skip)]
    pub family: ProductVectorFamily,
}

pub fn lpbs_estimate(sigma: &DensityMatrix, n: usize, restarts: usize, seed: u64, tol: &Tolerances) -> Result<LpbsReport> {
    lpbs_estimate_for_ensemble(&EigenEnsemble::of(sigma)?, n, restarts, seed, tol)
}

pub fn lpbs_estimate_for_ensemble(
    ens: &EigenEnsemble,
    n: usize,
    restarts: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<LpbsReport> {
    let sub = SubspaceSpec::range_of_power(ens, n)?;
    let check = SpanCheck::run(&sub, restarts, seed, tol)?;
    let rho = ens.density()?;
    let s = shannon_entropy_bits(ens.weights());
    let avg = ens.average_entanglement()?;
    let nf = n as f64;
    let local_a = nf * von_neumann_entropy(&rho.reduced(Subsystem::A))?;
    let local_b = nf * von_neumann_entropy(&rho.reduced(Subsystem::B))?;
    let log2_lb = if check.independent_count > 0 { (check.independent_count as f64).log2() } else { f64::NEG_INFINITY };
    let implied = if check.independent_count > 0 { (log2_lb / nf - avg).clamp(0.0, s) } else { 0.0 };
    Ok(LpbsReport {
        n,
        rank: check.dimension,
        lower_bound: check.independent_count,
        product_spanned: check.product_spanned,
        n_entropy: nf * s,
        n_avg_entanglement: nf * avg,
        implied_s_prime: implied,
        local_entropy_a: local_a,
        local_entropy_b: local_b,
        local_entropy_bound_holds: local_a.max(local_b) <= log2_lb + 1e-6,
        best_overlap: check.best_overlap,
        max_residual: check.max_residual,
        family: check.family,
    })
}

/// Explicit separable decomposition from a unitary change of basis between
/// weighted strings and an orthogonal product family.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem3Certificate {
    /// `A′_{jl} = ⟨ps_l|string_j⟩`.
    pub change_of_basis: ComplexMatrix,
    /// `max |A′†A′ − I|`.
    pub unitarity_deviation: f64,
    pub decomposition: Vec<(f64, PureState)>,
    /// Max-norm gap between `Σ w_l |ps_l⟩⟨ps_l|` and the normalized target.
    pub reconstruction_error: f64,
}

impl Theorem3Certificate {
    pub fn weight_sum(&self) -> f64 {
        self.decomposition.iter().map(|(w, _)| w).sum()
    }
}

/// Relates `strings` (orthonormal, with nonnegative weights) to `family`.
///
/// The target is `Σ w_j |s_j⟩⟨s_j| / Σ w_j`. Product weights are
/// `w_l = Σ_j w_j |A′_{jl}|²`, normalized. The certificate is refused when
/// `A′` is not unitary within `1e-8` or the product mixture misses the
/// target by `1e-8` or more.
pub fn theorem3_reconstruct(strings: &[(f64, Vec<C64>)], family: &ProductVectorFamily) -> Result<Theorem3Certificate> {
    let joints = family.joint_vectors();
    let mut deviation = 0.0f64;
    for (i, u) in joints.iter().enumerate() {
        for v in &joints[i + 1..] {
            deviation = deviation.max(inner(u, v).norm());
        }
    }
    if deviation > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal { deviation });
    }
    if strings.len() != joints.len() || strings.is_empty() {
        return Err(Error::CountMismatch { strings: strings.len(), family: joints.len() });
    }
    let d = family.shape.total();
    if let Some((_, s)) = strings.iter().find(|(_, s)| s.len() != d) {
        return Err(Error::ShapeMismatch { expected: format!("length {d}"), found: format!("length {}", s.len()) });
    }
    let k = strings.len();
    let a = ComplexMatrix::from_fn(k, k, |j, l| inner(&joints[l], &strings[j].1));
    let unitarity_deviation = a.unitarity_deviation();
    if unitarity_deviation >= UNITARITY_TOL {
        return Err(Error::NotUnitary { deviation: unitarity_deviation });
    }
    let total: f64 = strings.iter().map(|(w, _)| *w).sum();
    if !(total > 0.0) || strings.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::WeightSumInvalid { sum: total });
    }
    let product_weights: Vec<f64> =
        (0..k).map(|l| (0..k).map(|j| strings[j].0 * a[(j, l)].norm_sqr()).sum::<f64>() / total).collect();

    let mut gap = ComplexMatrix::zeros(d, d);
    for (w, s) in strings {
        accumulate(&mut gap, s, w / total);
    }
    for (w, j) in product_weights.iter().zip(&joints) {
        accumulate(&mut gap, j, -w);
    }
    let reconstruction_error = gap.max_norm();
    if reconstruction_error >= RECONSTRUCTION_TOL {
        return Err(Error::ReconstructionMismatch { error: reconstruction_error });
    }
    let decomposition = product_weights
        .into_iter()
        .zip(&family.members)
        .map(|(w, m)| Ok((w, PureState::product(&m.a, &m.b)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Theorem3Certificate { change_of_basis: a, unitarity_deviation, decomposition, reconstruction_error })
}

fn accumulate(m: &mut ComplexMatrix, v: &[C64], w: f64) {
    let d = v.len();
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] += v[i] * v[j].conj() * w;
        }
    }
}

/// Searches the range of `σ^⊗n` and tries to certify separability with the
/// eigen-strings of `σ^⊗n` against a greedy orthogonal subfamily of what
/// the search found.
pub fn certify_separable(ens: &EigenEnsemble, n: usize, family: &ProductVectorFamily, tol: &Tolerances) -> Result<Theorem3Certificate> {
    let strings = power_strings(ens, n)?;
    theorem3_reconstruct(&strings, &family.orthogonal_subfamily(tol)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub n: usize,
    /// Range of `σ^⊗n`.
    pub range: SpanCheck,
    /// Span of the likely strings; only for `n > 1`. May fail at small `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typical: Option<SpanCheck>,
}

pub fn verify_theorem1(sigma: &DensityMatrix, n: usize, restarts: usize, seed: u64, tol: &Tolerances) -> Result<Theorem1Report> {
    verify_theorem1_for_ensemble(&EigenEnsemble::of(sigma)?, n, restarts, seed, tol)
}

pub fn verify_theorem1_for_ensemble(
    ens: &EigenEnsemble,
    n: usize,
    restarts: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Theorem1Report> {
    let range = SpanCheck::run(&SubspaceSpec::range_of_power(ens, n)?, restarts, seed, tol)?;
    let typical = if n > 1 {
        let set = enumerate_for_ensemble(ens, n, true)?;
        let strings = set.strings.unwrap_or_default();
        let sub = SubspaceSpec::new(ens.shape().power(n)?, strings)?;
        Some(SpanCheck::run(&sub, restarts, seed, tol)?)
    } else {
        None
    };
    Ok(Theorem1Report { n, range, typical })
}

/// Arrangement labels for [`power_strings`] entries, in the same order.
pub fn power_string_labels(rank: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for counts in compositions(n, rank) {
        out.extend(multiset_permutations(&counts));
    }
    out.sort();
    out
}

fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|k| {
            compositions(n - k, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, k);
                rest
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn e(i: usize, d: usize) -> Vec<C64> {
        let mut v = vec![ZERO; d];
        v[i] = C64::new(1.0, 0.0);
        v
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn product_subspace_found() {
        let q = BipartiteShape::qubits();
        let sub = SubspaceSpec::new(q, vec![e(0, 4), e(1, 4)]).unwrap();
        let fam = seesaw_product_search(&sub, 16, 1, &tol()).unwrap();
        assert_eq!(fam.independent_count, 2);
        assert!(fam.max_residual() < 1e-8);
    }

    #[test]
    fn classical_range_members() {
        let ens = EigenEnsemble::of(&zoo::classical(0.5).unwrap()).unwrap();
        let sub = SubspaceSpec::range_of(&ens);
        let fam = seesaw_product_search(&sub, 32, 7, &tol()).unwrap();
        assert_eq!(fam.independent_count, 2);
        assert_eq!(fam.members.len(), 2);
        assert!(fam.max_residual() < 1e-8);
        assert!((inner(&fam.members[0].joint(), &e(0, 4)).norm() - 1.0).abs() < 1e-10);
        assert!((inner(&fam.members[1].joint(), &e(3, 4)).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn entangled_pure_state_has_no_members() {
        let ens = EigenEnsemble::of(&DensityMatrix::from_pure(&zoo::phi(true))).unwrap();
        let sub = SubspaceSpec::range_of(&ens);
        let fam = seesaw_product_search(&sub, 16, 0, &tol()).unwrap();
        assert!(fam.members.is_empty());
        assert!((fam.stats.best_overlap - 0.5).abs() < 1e-9);
    }

    #[test]
    fn restart_trace_is_monotone() {
        let ens = zoo::bell_mixture_ensemble(0.5).unwrap();
        let set = enumerate_for_ensemble(&ens, 2, true).unwrap();
        let sub = SubspaceSpec::new(BipartiteShape::new(4, 4).unwrap(), set.strings.unwrap()).unwrap();
        for r in 0..8 {
            let out = seesaw_restart(&sub, 3, r).unwrap();
            for w in out.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "{:?}", out.trace);
            }
            assert!(out.overlap <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn restarts_are_reproducible() {
        let sub = SubspaceSpec::new(BipartiteShape::qubits(), vec![e(0, 4), e(1, 4)]).unwrap();
        let x = seesaw_product_search(&sub, 8, 42, &tol()).unwrap();
        let y = seesaw_product_search(&sub, 8, 42, &tol()).unwrap();
        assert_eq!(x, y);
        assert_eq!(seesaw_restart(&sub, 42, 5).unwrap().a, seesaw_restart(&sub, 42, 5).unwrap().a);
    }

    #[test]
    fn subspace_validation() {
        let q = BipartiteShape::qubits();
        let skew = vec![e(0, 4), vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0), ZERO, ZERO]];
        assert!(matches!(SubspaceSpec::new(q, skew.clone()), Err(Error::NotOrthogonal { .. })));
        assert_eq!(SubspaceSpec::from_vectors(q, &skew, 1e-8).unwrap().dim(), 2);
        assert!(SubspaceSpec::new(q, vec![e(0, 3)]).is_err());
        let sub = SubspaceSpec::new(q, vec![e(0, 4)]).unwrap();
        let p = sub.projector();
        assert!(p.matmul(&p).max_abs_diff(&p) < 1e-10);
    }

    #[test]
    fn lpbs_examples() {
        let prod = EigenEnsemble::of(&DensityMatrix::from_pure(&PureState::basis(BipartiteShape::qubits(), 0, 0))).unwrap();
        for n in 1..=3 {
            let r = lpbs_estimate_for_ensemble(&prod, n, 8, 0, &tol()).unwrap();
            assert_eq!((r.rank, r.lower_bound, r.product_spanned), (1, 1, true));
        }

        let classical = lpbs_estimate(&zoo::classical(0.5).unwrap(), 2, 64, 0, &tol()).unwrap();
        assert_eq!((classical.rank, classical.lower_bound), (4, 4));
        assert!(classical.product_spanned && classical.local_entropy_bound_holds);
        assert!((classical.n_entropy - 2.0).abs() < 1e-12);

        let half = lpbs_estimate_for_ensemble(&zoo::bell_mixture_ensemble(0.5).unwrap(), 1, 64, 0, &tol()).unwrap();
        assert_eq!((half.rank, half.lower_bound), (2, 2));
        assert!(half.product_spanned);
        assert!((half.n_avg_entanglement - 1.0).abs() < 1e-9);
        assert!(half.implied_s_prime.abs() < 1e-12);
    }

    #[test]
    fn theorem3_classical_permutation() {
        let ens = EigenEnsemble::of(&zoo::classical(0.5).unwrap()).unwrap();
        let sub = SubspaceSpec::range_of_power(&ens, 2).unwrap();
        let fam = seesaw_product_search(&sub, 64, 0, &tol()).unwrap();
        let cert = certify_separable(&ens, 2, &fam, &tol()).unwrap();
        let a = &cert.change_of_basis;
        for j in 0..4 {
            let ones = (0..4).filter(|&l| (a[(j, l)].norm() - 1.0).abs() < 1e-10).count();
            let zeros = (0..4).filter(|&l| a[(j, l)].norm() < 1e-10).count();
            assert_eq!((ones, zeros), (1, 3));
        }
        assert!(cert.reconstruction_error < 1e-10);
        assert!((cert.weight_sum() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn theorem3_maximally_mixed_computational_basis() {
        let q = BipartiteShape::qubits();
        let ens = EigenEnsemble::of(&DensityMatrix::maximally_mixed(q)).unwrap();
        let sub = SubspaceSpec::range_of(&ens);
        let pairs = (0..2).flat_map(|i| (0..2).map(move |j| (e(i, 2), e(j, 2)))).collect();
        let fam = ProductVectorFamily::from_products(&sub, pairs, &tol()).unwrap();
        let cert = certify_separable(&ens, 1, &fam, &tol()).unwrap();
        assert!(cert.unitarity_deviation < 1e-8);
        for (w, _) in &cert.decomposition {
            assert!((w - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn theorem3_bell_half_hadamard() {
        let ens = zoo::bell_mixture_ensemble(0.5).unwrap();
        let sub = SubspaceSpec::range_of(&ens);
        let fam = ProductVectorFamily::from_products(&sub, vec![(e(0, 2), e(0, 2)), (e(1, 2), e(1, 2))], &tol()).unwrap();
        let cert = certify_separable(&ens, 1, &fam, &tol()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = ComplexMatrix::from_fn(2, 2, |j, l| C64::new(if j == 1 && l == 1 { -h } else { h }, 0.0));
        assert!(cert.change_of_basis.max_abs_diff(&expected) < 1e-12);
        assert!(cert.reconstruction_error < 1e-10);
        let target = ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]);
        let mut rebuilt = ComplexMatrix::zeros(4, 4);
        for (w, psi) in &cert.decomposition {
            rebuilt = &rebuilt + &psi.projector().scale(*w);
        }
        assert!(rebuilt.max_abs_diff(&target) < 1e-12);
    }

    #[test]
    fn theorem3_refusals() {
        let ens = zoo::bell_mixture_ensemble(0.25).unwrap();
        let sub = SubspaceSpec::range_of(&ens);
        // unequal weights: A′ is unitary but the product mixture is not the target
        let fam = ProductVectorFamily::from_products(&sub, vec![(e(0, 2), e(0, 2)), (e(1, 2), e(1, 2))], &tol()).unwrap();
        assert!(matches!(certify_separable(&ens, 1, &fam, &tol()), Err(Error::ReconstructionMismatch { .. })));
        let one = ProductVectorFamily::from_products(&sub, vec![(e(0, 2), e(0, 2))], &tol()).unwrap();
        assert!(matches!(certify_separable(&ens, 1, &one, &tol()), Err(Error::CountMismatch { .. })));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = vec![C64::new(h, 0.0), C64::new(h, 0.0)];
        let skew = ProductVectorFamily::from_products(&sub, vec![(e(0, 2), e(0, 2)), (e(0, 2), plus)], &tol()).unwrap();
        assert!(matches!(
            theorem3_reconstruct(&power_strings(&ens, 1).unwrap(), &skew),
            Err(Error::NotOrthogonal { .. })
        ));
        let wrong = ProductVectorFamily::from_products(&sub, vec![(e(0, 2), e(0, 2)), (e(0, 2), e(1, 2))], &tol()).unwrap();
        assert!(matches!(certify_separable(&ens, 1, &wrong, &tol()), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn theorem1_examples() {
        let pure = verify_theorem1(&DensityMatrix::from_pure(&zoo::phi(true)), 1, 16, 0, &tol()).unwrap();
        assert_eq!(pure.range.dimension, 1);
        assert!(!pure.range.product_spanned);
        assert!(pure.typical.is_none());

        let half = verify_theorem1_for_ensemble(&zoo::bell_mixture_ensemble(0.5).unwrap(), 2, 32, 0, &tol()).unwrap();
        assert!(half.range.product_spanned);
        let typ = half.typical.unwrap();
        assert!(!typ.product_spanned);
        assert!((typ.best_overlap - 0.5).abs() < 1e-3);
    }

    #[test]
    fn power_strings_order_and_labels() {
        let ens = zoo::bell_mixture_ensemble(0.25).unwrap();
        let strings = power_strings(&ens, 2).unwrap();
        let labels = power_string_labels(2, 2);
        assert_eq!(labels, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let w: Vec<f64> = strings.iter().map(|s| s.0).collect();
        let expected = [0.75 * 0.75, 0.75 * 0.25, 0.25 * 0.75, 0.25 * 0.25];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
