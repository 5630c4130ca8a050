//! Likely strings of `σ^⊗n`: type-class counts, exact multinomials against
//! `2^{nS}`, and the subspace spanned by the strings for small `n`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::SpectrumVector;
use crate::linalg::{kron_vec, ComplexMatrix, C64};
use crate::state::{regroup_permutation, shannon_entropy_bits, BipartiteShape, DensityMatrix, EigenEnsemble, EIGEN_FLOOR};
use crate::{Error, Result};

/// Largest type class that may be materialized.
pub const MAX_STRINGS: usize = 10_000;

/// Multiplicities `k_i ≈ n·λ_i` summing to `n`, by largest remainder.
/// Entries at or below `1e-10` get multiplicity 0. Remainder ties go to the
/// lower index.
pub fn likely_counts(spectrum: &SpectrumVector, n: usize) -> Vec<usize> {
    let values = spectrum.values();
    let total: f64 = values.iter().filter(|&&v| v > EIGEN_FLOOR).sum();
    if total <= 0.0 || n == 0 {
        return vec![0; values.len()];
    }
    let targets: Vec<f64> = values
        .iter()
        .map(|&v| if v > EIGEN_FLOOR { n as f64 * v / total } else { 0.0 })
        .collect();
    let mut counts: Vec<usize> = targets
        .iter()
        .map(|&t| {
            // snap values that are integral up to roundoff
            let r = t.round();
            if (t - r).abs() < 1e-9 { r as usize } else { t.floor() as usize }
        })
        .collect();
    let assigned: usize = counts.iter().sum();
    if assigned < n {
        let mut order: Vec<usize> = (0..values.len()).filter(|&i| targets[i] > 0.0).collect();
        order.sort_by(|&i, &j| {
            let (ri, rj) = (targets[i] - counts[i] as f64, targets[j] - counts[j] as f64);
            rj.total_cmp(&ri).then(i.cmp(&j))
        });
        for &i in order.iter().cycle().take(n - assigned) {
            counts[i] += 1;
        }
    } else if assigned > n {
        // only reachable through snapping; take back from the smallest remainders
        let mut order: Vec<usize> = (0..values.len()).filter(|&i| counts[i] > 0).collect();
        order.sort_by(|&i, &j| {
            let (ri, rj) = (targets[i] - counts[i] as f64, targets[j] - counts[j] as f64);
            ri.total_cmp(&rj).then(j.cmp(&i))
        });
        for &i in order.iter().cycle().take(assigned - n) {
            counts[i] -= 1;
        }
    }
    counts
}

/// `n! / Π k_i!` in exact integer arithmetic.
pub fn multinomial(counts: &[usize]) -> BigUint {
    // product of binomials C(k_1 + … + k_j, k_j), each built incrementally
    let mut result = BigUint::one();
    let mut seen = 0usize;
    for &k in counts {
        for i in 1..=k {
            seen += 1;
            result *= seen;
            result /= i;
        }
    }
    result
}

/// `log2` of an arbitrary-size integer; `−∞` for zero.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::log2);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log2() + shift as f64
}

/// One type class of `σ^⊗n`.
#[derive(Debug, Clone)]
pub struct LikelyStringSet {
    pub n: usize,
    /// Single-copy shape; materialized strings live on `shape^n`, regrouped.
    pub shape: BipartiteShape,
    pub weights: Vec<f64>,
    pub counts: Vec<usize>,
    pub exact_count: BigUint,
    /// `n·S(σ)`.
    pub asymptotic_count_log2: f64,
    /// `Π λ_i^{k_i}`, the probability of each individual string.
    pub string_probability: f64,
    /// Eigenstate index per tensor slot, in lexicographic order.
    pub arrangements: Option<Vec<Vec<usize>>>,
    pub strings: Option<Vec<Vec<C64>>>,
}

impl LikelyStringSet {
    pub fn log2_exact_count(&self) -> f64 {
        log2_biguint(&self.exact_count)
    }

    pub fn is_materialized(&self) -> bool {
        self.strings.is_some()
    }

    /// `exact_count · p`, the total weight of the type class.
    pub fn typical_mass(&self) -> f64 {
        (self.log2_exact_count() + self.string_probability.log2()).exp2()
    }
}

/// Lexicographically ordered distinct permutations of a multiset.
pub fn multiset_permutations(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = counts.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k)).collect();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn enumerate_likely_strings(sigma: &DensityMatrix, n: usize, materialize: bool) -> Result<LikelyStringSet> {
    enumerate_for_ensemble(&EigenEnsemble::of(sigma)?, n, materialize)
}

/// Likely strings built from a given eigen-ensemble of `σ`.
pub fn enumerate_for_ensemble(ens: &EigenEnsemble, n: usize, materialize: bool) -> Result<LikelyStringSet> {
    if n == 0 {
        return Err(Error::ParamOutOfRange { name: "n".into(), value: 0.0, domain: ">= 1".into() });
    }
    let weights = ens.weights().to_vec();
    let spectrum = SpectrumVector::new(weights.clone())?;
    let counts = likely_counts(&spectrum, n);
    let exact_count = multinomial(&counts);
    let string_probability = weights.iter().zip(&counts).map(|(w, &k)| w.powi(k as i32)).product();
    let mut set = LikelyStringSet {
        n,
        shape: ens.shape(),
        asymptotic_count_log2: n as f64 * shannon_entropy_bits(&weights),
        weights,
        counts,
        exact_count,
        string_probability,
        arrangements: None,
        strings: None,
    };
    if materialize {
        let count = set.exact_count.to_usize().filter(|&c| c <= MAX_STRINGS);
        if count.is_none() {
            return Err(Error::TooManyStrings { count: set.exact_count.to_string(), cap: MAX_STRINGS });
        }
        let perm = regroup_permutation(set.shape, n)?;
        let arrangements = multiset_permutations(&set.counts);
        let states = ens.states();
        let strings = arrangements
            .par_iter()
            .map(|arr| {
                let natural = arr[1..]
                    .iter()
                    .fold(states[arr[0]].amplitudes().to_vec(), |acc, &s| kron_vec(&acc, states[s].amplitudes()));
                perm.iter().map(|&p| natural[p]).collect()
            })
            .collect();
        set.arrangements = Some(arrangements);
        set.strings = Some(strings);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub counts: Vec<usize>,
    /// Decimal digits of the multinomial.
    pub exact_count: String,
    pub log2_exact_count: f64,
    /// `(1/n)·log2(exact_count)`.
    pub rate: f64,
    pub entropy: f64,
    /// `n·S`.
    pub n_entropy: f64,
    /// `S − rate`.
    pub gap: f64,
    pub string_probability: f64,
    /// `exact_count · string_probability`.
    pub typical_mass: f64,
}

/// Exact type-class size against `2^{nS}` for each `n`.
pub fn typicality_convergence(spectrum: &SpectrumVector, n_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let weights: Vec<f64> = spectrum.values().iter().copied().filter(|&v| v > EIGEN_FLOOR).collect();
    let entropy = shannon_entropy_bits(&weights);
    let kept = SpectrumVector::new(weights.clone())?;
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::ParamOutOfRange { name: "n".into(), value: 0.0, domain: ">= 1".into() });
            }
            let counts = likely_counts(&kept, n);
            let exact = multinomial(&counts);
            let log2_count = log2_biguint(&exact);
            let log2_p: f64 = weights.iter().zip(&counts).map(|(w, &k)| k as f64 * w.log2()).sum();
            let rate = log2_count / n as f64;
            Ok(ConvergenceRow {
                n,
                counts,
                exact_count: exact.to_string(),
                log2_exact_count: log2_count,
                rate,
                entropy,
                n_entropy: n as f64 * entropy,
                gap: entropy - rate,
                string_probability: log2_p.exp2(),
                typical_mass: (log2_count + log2_p).exp2(),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TypicalSubspace {
    /// Shape of the regrouped `A…A : B…B` cut.
    pub shape: BipartiteShape,
    pub basis: Vec<Vec<C64>>,
    pub projector: ComplexMatrix,
}

impl TypicalSubspace {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

/// Projector onto the span of materialized likely strings.
pub fn typical_subspace_projector(set: &LikelyStringSet) -> Result<TypicalSubspace> {
    let strings = set.strings.as_ref().ok_or(Error::NotMaterialized)?;
    let shape = set.shape.power(set.n)?;
    let d = shape.total();
    let mut projector = ComplexMatrix::zeros(d, d);
    for s in strings {
        projector = &projector + &ComplexMatrix::outer(s, s);
    }
    Ok(TypicalSubspace { shape, basis: strings.clone(), projector })
}
