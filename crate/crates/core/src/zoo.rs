//! Parameterized state families and seeded random generators.
//!
//! Every generator is a pure function of its parameters and seed. Random
//! draws use ChaCha8 seeded with `seed_from_u64`, so output is bit-identical
//! across runs and platforms.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::linalg::{self, orthonormalize, ComplexMatrix, C64, ZERO};
use crate::state::{BipartiteShape, DensityMatrix, EigenEnsemble, PureState, WEIGHT_SUM_TOL};
use crate::{Error, Result};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange { name: name.into(), value, domain: "[0, 1]".into() })
    }
}

/// `(|00⟩ ± |11⟩)/√2`.
pub fn phi(plus: bool) -> PureState {
    let s = if plus { 1.0 } else { -1.0 };
    PureState::new(BipartiteShape::qubits(), vec![re(FRAC_1_SQRT_2), ZERO, ZERO, re(s * FRAC_1_SQRT_2)])
        .expect("unit norm")
}

/// `(|01⟩ ± |10⟩)/√2`.
pub fn psi(plus: bool) -> PureState {
    let s = if plus { 1.0 } else { -1.0 };
    PureState::new(BipartiteShape::qubits(), vec![ZERO, re(FRAC_1_SQRT_2), re(s * FRAC_1_SQRT_2), ZERO])
        .expect("unit norm")
}

/// Bell basis in the order `Φ⁺, Φ⁻, Ψ⁺, Ψ⁻`.
pub fn bell_basis() -> [PureState; 4] {
    [phi(true), phi(false), psi(true), psi(false)]
}

/// State diagonal in the Bell basis with weights on `Φ⁺, Φ⁻, Ψ⁺, Ψ⁻`.
pub fn bell_diagonal(weights: [f64; 4]) -> Result<DensityMatrix> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !((sum - 1.0).abs() < WEIGHT_SUM_TOL) {
        return Err(Error::WeightSumInvalid { sum });
    }
    let [a, b, c, d] = weights;
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = re((a + b) / 2.0);
    m[(3, 3)] = re((a + b) / 2.0);
    m[(1, 1)] = re((c + d) / 2.0);
    m[(2, 2)] = re((c + d) / 2.0);
    m[(0, 3)] = re((a - b) / 2.0);
    m[(3, 0)] = re((a - b) / 2.0);
    m[(1, 2)] = re((c - d) / 2.0);
    m[(2, 1)] = re((c - d) / 2.0);
    DensityMatrix::new(BipartiteShape::qubits(), m)
}

/// Declared Bell eigenbasis of [`bell_diagonal`].
pub fn bell_diagonal_ensemble(weights: [f64; 4]) -> Result<EigenEnsemble> {
    EigenEnsemble::from_pairs(weights.into_iter().zip(bell_basis()).collect())
}

/// `λ|Φ⁺⟩⟨Φ⁺| + (1−λ)|Φ⁻⟩⟨Φ⁻|`.
pub fn bell_mixture(lambda: f64) -> Result<DensityMatrix> {
    check_unit_interval("lambda", lambda)?;
    bell_diagonal([lambda, 1.0 - lambda, 0.0, 0.0])
}

/// Eigen-ensemble `{(λ, Φ⁺), (1−λ, Φ⁻)}` of [`bell_mixture`]; at `λ = ½`
/// this fixes the Bell basis among the degenerate choices.
pub fn bell_mixture_ensemble(lambda: f64) -> Result<EigenEnsemble> {
    check_unit_interval("lambda", lambda)?;
    EigenEnsemble::from_pairs(vec![(lambda, phi(true)), (1.0 - lambda, phi(false))])
}

/// `p|Ψ⁻⟩⟨Ψ⁻| + (1−p)I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    let q = (1.0 - p) / 4.0;
    bell_diagonal([q, q, q, 1.0 - 3.0 * q])
}

/// `f|Φ_d⟩⟨Φ_d| + (1−f)/(d²−1)·(I − |Φ_d⟩⟨Φ_d|)` on `d ⊗ d`, `d ∈ {2, 3}`,
/// where `|Φ_d⟩ = Σ_i |ii⟩/√d`.
pub fn isotropic(f: f64, d: usize) -> Result<DensityMatrix> {
    check_unit_interval("f", f)?;
    if !(2..=3).contains(&d) {
        return Err(Error::ParamOutOfRange { name: "d".into(), value: d as f64, domain: "{2, 3}".into() });
    }
    let shape = BipartiteShape::new(d, d)?;
    let dd = d * d;
    let rest = (1.0 - f) / (dd as f64 - 1.0);
    let m = ComplexMatrix::from_fn(dd, dd, |r, c| {
        let on_max = r % (d + 1) == 0 && c % (d + 1) == 0;
        let proj = if on_max { 1.0 / d as f64 } else { 0.0 };
        let ident = if r == c { 1.0 } else { 0.0 };
        re(f * proj + rest * (ident - proj))
    });
    DensityMatrix::new(shape, m)
}

/// `p|00⟩⟨00| + (1−p)|11⟩⟨11|` on `2 ⊗ 2`.
pub fn classical(p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    DensityMatrix::new(BipartiteShape::qubits(), ComplexMatrix::from_real_diag(&[p, 0.0, 0.0, 1.0 - p]))
}

fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect()
}

/// Uniformly distributed unit vector (normalized complex Gaussian).
pub fn random_unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    loop {
        if let Some(v) = linalg::normalized(&gaussian_vector(rng, dim)) {
            return v;
        }
    }
}

/// Uniform draw from the probability simplex.
fn dirichlet_uniform<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.iter().map(|x| x / total).collect()
}

/// One component of a separable witness decomposition.
#[derive(Debug, Clone)]
pub struct ProductComponent {
    pub weight: f64,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

/// A random separable state together with the product decomposition it was
/// built from.
#[derive(Debug, Clone)]
pub struct SeparableSample {
    pub state: DensityMatrix,
    pub witness: Vec<ProductComponent>,
}

pub fn random_separable(shape: BipartiteShape, k: usize, seed: u64) -> Result<SeparableSample> {
    if k == 0 {
        return Err(Error::ParamOutOfRange { name: "k".into(), value: 0.0, domain: ">= 1".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = dirichlet_uniform(&mut rng, k);
    let witness: Vec<ProductComponent> = weights
        .into_iter()
        .map(|weight| ProductComponent {
            weight,
            a: random_unit_vector(&mut rng, shape.dim_a),
            b: random_unit_vector(&mut rng, shape.dim_b),
        })
        .collect();
    let d = shape.total();
    let mut m = ComplexMatrix::zeros(d, d);
    for comp in &witness {
        let v = linalg::kron_vec(&comp.a, &comp.b);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += v[i] * v[j].conj() * comp.weight;
            }
        }
    }
    let state = DensityMatrix::new(shape, normalize_trace(m))?;
    Ok(SeparableSample { state, witness })
}

/// Random state of the given rank: Dirichlet-uniform spectrum on a random
/// orthonormal frame.
pub fn random_density(shape: BipartiteShape, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let d = shape.total();
    if rank == 0 || rank > d {
        return Err(Error::RankOutOfRange { rank, dim: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame: Vec<Vec<C64>> = Vec::new();
    while frame.len() < rank {
        let mut candidates = frame.clone();
        candidates.push(gaussian_vector(&mut rng, d));
        frame = orthonormalize(&candidates);
    }
    let spectrum = dirichlet_uniform(&mut rng, rank);
    let mut m = ComplexMatrix::zeros(d, d);
    for (lambda, v) in spectrum.iter().zip(&frame) {
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += v[i] * v[j].conj() * *lambda;
            }
        }
    }
    DensityMatrix::new(shape, normalize_trace(m))
}

fn normalize_trace(m: ComplexMatrix) -> ComplexMatrix {
    let t = m.trace().re;
    m.scale(1.0 / t)
}

/// Parameter description for the `zoo` listing.
#[derive(Debug, Clone, Serialize)]
pub struct ParamInfo {
    pub name: &'static str,
    pub domain: &'static str,
    pub default: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyInfo {
    pub name: &'static str,
    pub shape: &'static str,
    pub description: &'static str,
    /// Parameter swept by `--grid`.
    pub sweep_param: Option<&'static str>,
    pub params: Vec<ParamInfo>,
}

const fn param(name: &'static str, domain: &'static str, default: Option<f64>) -> ParamInfo {
    ParamInfo { name, domain, default }
}

pub fn families() -> Vec<FamilyInfo> {
    vec![
        FamilyInfo {
            name: "bell-mixture",
            shape: "2x2",
            description: "lambda |Phi+><Phi+| + (1 - lambda) |Phi-><Phi-|",
            sweep_param: Some("lambda"),
            params: vec![param("lambda", "[0, 1]", None)],
        },
        FamilyInfo {
            name: "bell-diagonal",
            shape: "2x2",
            description: "w1 Phi+ + w2 Phi- + w3 Psi+ + w4 Psi-, weights summing to 1",
            sweep_param: None,
            params: vec![
                param("w1", "[0, 1]", None),
                param("w2", "[0, 1]", None),
                param("w3", "[0, 1]", None),
                param("w4", "[0, 1]", None),
            ],
        },
        FamilyInfo {
            name: "werner",
            shape: "2x2",
            description: "p |Psi-><Psi-| + (1 - p) I/4",
            sweep_param: Some("p"),
            params: vec![param("p", "[0, 1]", None)],
        },
        FamilyInfo {
            name: "isotropic",
            shape: "dxd",
            description: "f |Phi_d><Phi_d| + (1 - f)/(d^2 - 1) (I - |Phi_d><Phi_d|)",
            sweep_param: Some("f"),
            params: vec![param("f", "[0, 1]", None), param("d", "{2, 3}", Some(2.0))],
        },
        FamilyInfo {
            name: "classical",
            shape: "2x2",
            description: "p |00><00| + (1 - p) |11><11|",
            sweep_param: Some("p"),
            params: vec![param("p", "[0, 1]", Some(0.5))],
        },
        FamilyInfo {
            name: "maximally-mixed",
            shape: "da x db",
            description: "I / (da db)",
            sweep_param: None,
            params: vec![param("da", ">= 2", Some(2.0)), param("db", ">= 2", Some(2.0))],
        },
        FamilyInfo {
            name: "random-separable",
            shape: "da x db",
            description: "Dirichlet mixture of k random product pure states",
            sweep_param: None,
            params: vec![
                param("da", ">= 2", Some(2.0)),
                param("db", ">= 2", Some(2.0)),
                param("k", ">= 1", Some(4.0)),
                param("seed", ">= 0", Some(0.0)),
            ],
        },
        FamilyInfo {
            name: "random-density",
            shape: "da x db",
            description: "random frame with Dirichlet spectrum of the given rank",
            sweep_param: None,
            params: vec![
                param("da", ">= 2", Some(2.0)),
                param("db", ">= 2", Some(2.0)),
                param("rank", "1..=da*db", Some(4.0)),
                param("seed", ">= 0", Some(0.0)),
            ],
        },
    ]
}

/// A family name plus parameter assignments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    pub family: String,
    pub params: BTreeMap<String, f64>,
}

/// A family member with whatever side information the family knows.
#[derive(Debug, Clone)]
pub struct FamilyState {
    pub state: DensityMatrix,
    /// Declared eigen-ensemble, when the family fixes one.
    pub ensemble: Option<EigenEnsemble>,
    pub witness: Option<Vec<ProductComponent>>,
}

impl FamilySpec {
    pub fn new(family: &str) -> Self {
        Self { family: family.to_string(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Parses `K=V` assignments.
    pub fn parse(family: &str, assignments: &[String]) -> Result<Self> {
        let mut spec = Self::new(family);
        for a in assignments {
            let (k, v) = a.split_once('=').ok_or_else(|| Error::Parse {
                context: format!("--param {a}"),
                message: "expected K=V".into(),
            })?;
            let value: f64 = v.trim().parse().map_err(|_| Error::Parse {
                context: format!("--param {a}"),
                message: format!("`{v}` is not a number"),
            })?;
            spec.params.insert(k.trim().to_string(), value);
        }
        Ok(spec)
    }

    pub fn info(&self) -> Result<FamilyInfo> {
        families()
            .into_iter()
            .find(|f| f.name == self.family)
            .ok_or_else(|| Error::UnknownFamily(self.family.clone()))
    }

    fn get(&self, info: &FamilyInfo, name: &str) -> Result<f64> {
        if let Some(v) = self.params.get(name) {
            return Ok(*v);
        }
        info.params
            .iter()
            .find(|p| p.name == name)
            .and_then(|p| p.default)
            .ok_or_else(|| Error::Parse {
                context: format!("family {}", self.family),
                message: format!("missing parameter `{name}`"),
            })
    }

    fn get_count(&self, info: &FamilyInfo, name: &str) -> Result<usize> {
        let v = self.get(info, name)?;
        if v < 0.0 || v.fract() != 0.0 || v > 1e12 {
            return Err(Error::ParamOutOfRange { name: name.into(), value: v, domain: "nonnegative integer".into() });
        }
        Ok(v as usize)
    }

    pub fn build(&self) -> Result<FamilyState> {
        let info = self.info()?;
        for key in self.params.keys() {
            if !info.params.iter().any(|p| p.name == key) {
                return Err(Error::Parse {
                    context: format!("family {}", self.family),
                    message: format!("unknown parameter `{key}`"),
                });
            }
        }
        let plain = |state| FamilyState { state, ensemble: None, witness: None };
        Ok(match info.name {
            "bell-mixture" => {
                let lambda = self.get(&info, "lambda")?;
                FamilyState {
                    state: bell_mixture(lambda)?,
                    ensemble: Some(bell_mixture_ensemble(lambda)?),
                    witness: None,
                }
            }
            "bell-diagonal" => {
                let w = [
                    self.get(&info, "w1")?,
                    self.get(&info, "w2")?,
                    self.get(&info, "w3")?,
                    self.get(&info, "w4")?,
                ];
                FamilyState { state: bell_diagonal(w)?, ensemble: Some(bell_diagonal_ensemble(w)?), witness: None }
            }
            "werner" => {
                let p = self.get(&info, "p")?;
                let q = (1.0 - p) / 4.0;
                FamilyState {
                    state: werner(p)?,
                    ensemble: Some(bell_diagonal_ensemble([q, q, q, 1.0 - 3.0 * q])?),
                    witness: None,
                }
            }
            "isotropic" => plain(isotropic(self.get(&info, "f")?, self.get_count(&info, "d")?)?),
            "classical" => plain(classical(self.get(&info, "p")?)?),
            "maximally-mixed" => {
                let shape = BipartiteShape::new(self.get_count(&info, "da")?, self.get_count(&info, "db")?)?;
                plain(DensityMatrix::maximally_mixed(shape))
            }
            "random-separable" => {
                let shape = BipartiteShape::new(self.get_count(&info, "da")?, self.get_count(&info, "db")?)?;
                let sample =
                    random_separable(shape, self.get_count(&info, "k")?, self.get_count(&info, "seed")? as u64)?;
                FamilyState { state: sample.state, ensemble: None, witness: Some(sample.witness) }
            }
            "random-density" => {
                let shape = BipartiteShape::new(self.get_count(&info, "da")?, self.get_count(&info, "db")?)?;
                plain(random_density(shape, self.get_count(&info, "rank")?, self.get_count(&info, "seed")? as u64)?)
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use crate::state::{partial_trace, partial_transpose, Subsystem};

    fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d < tol, "difference {d:e} exceeds {tol:e}");
    }

    #[test]
    fn bell_mixture_endpoints() {
        assert_close(bell_mixture(1.0).unwrap().matrix(), &phi(true).projector(), 1e-15);
        assert_close(bell_mixture(0.0).unwrap().matrix(), &phi(false).projector(), 1e-15);
        // ½(Φ⁺ + Φ⁻) expands to ½(|00⟩⟨00| + |11⟩⟨11|)
        let half = &phi(true).projector().scale(0.5) + &phi(false).projector().scale(0.5);
        assert_close(bell_mixture(0.5).unwrap().matrix(), &half, 1e-15);
        assert_close(&half, &ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]), 1e-15);
        assert!(bell_mixture(1.1).is_err());
    }

    #[test]
    fn bell_mixture_quarter_values() {
        let rho = bell_mixture(0.25).unwrap();
        let s = rho.entropy().unwrap();
        assert!((s - 0.8113).abs() < 1e-4);
        let ens = bell_mixture_ensemble(0.25).unwrap();
        assert_eq!(ens.weights(), &[0.75, 0.25]);
        assert!((ens.average_entanglement().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_diagonal_examples() {
        assert_close(bell_diagonal([1.0, 0.0, 0.0, 0.0]).unwrap().matrix(), &phi(true).projector(), 1e-15);
        assert_close(
            bell_diagonal([0.25; 4]).unwrap().matrix(),
            &ComplexMatrix::identity(4).scale(0.25),
            1e-15,
        );
        let w = bell_diagonal([0.55, 0.15, 0.15, 0.15]).unwrap();
        let spec = w.spectrum().unwrap();
        for (x, y) in spec.iter().zip([0.55, 0.15, 0.15, 0.15]) {
            assert!((x - y).abs() < 1e-12);
        }
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert_close(&partial_trace(&w, Subsystem::A), &half, 1e-15);
        assert_close(&partial_trace(&w, Subsystem::B), &half, 1e-15);
        assert!(matches!(bell_diagonal([0.5, 0.5, 0.5, 0.0]), Err(Error::WeightSumInvalid { .. })));
    }

    #[test]
    fn bell_diagonal_states_commute() {
        let a = bell_diagonal([0.1, 0.2, 0.3, 0.4]).unwrap();
        let b = bell_diagonal([0.7, 0.05, 0.05, 0.2]).unwrap();
        let ab = a.matrix().matmul(b.matrix());
        let ba = b.matrix().matmul(a.matrix());
        assert!(ab.max_abs_diff(&ba) < 1e-12);
    }

    #[test]
    fn werner_examples() {
        assert_close(werner(0.0).unwrap().matrix(), &ComplexMatrix::identity(4).scale(0.25), 1e-15);
        assert_close(werner(1.0).unwrap().matrix(), &psi(false).projector(), 1e-15);
        for k in 0..=50 {
            let p = k as f64 / 50.0;
            let spec = werner(p).unwrap().spectrum().unwrap();
            assert!((spec[0] - (1.0 + 3.0 * p) / 4.0).abs() < 1e-10);
            for x in &spec[1..] {
                assert!((x - (1.0 - p) / 4.0).abs() < 1e-10);
            }
        }
        let pt = partial_transpose(&werner(1.0 / 3.0).unwrap(), Subsystem::B);
        assert!(hermitian_eig(&pt).unwrap().eigenvalues[3].abs() < 1e-9);
        assert!(werner(-0.1).is_err());
    }

    #[test]
    fn isotropic_ppt_threshold() {
        for d in [2usize, 3] {
            let f0 = 1.0 / d as f64;
            for (f, negative) in [(f0 - 0.01, false), (f0 + 0.01, true)] {
                let rho = isotropic(f, d).unwrap();
                let pt = partial_transpose(&rho, Subsystem::B);
                let min = *hermitian_eig(&pt).unwrap().eigenvalues.last().unwrap();
                assert_eq!(min < -1e-9, negative, "d={d} f={f} min={min}");
            }
        }
        assert!(isotropic(0.5, 4).is_err());
    }

    #[test]
    fn random_separable_is_reproducible() {
        let shape = BipartiteShape::qubits();
        let a = random_separable(shape, 4, 42).unwrap();
        let b = random_separable(shape, 4, 42).unwrap();
        assert_eq!(a.state, b.state);
        let one = random_separable(shape, 1, 3).unwrap();
        assert!((one.state.spectrum().unwrap()[0] - 1.0).abs() < 1e-12);
        let pt = partial_transpose(&a.state, Subsystem::B);
        assert!(*hermitian_eig(&pt).unwrap().eigenvalues.last().unwrap() > -1e-9);
        let wsum: f64 = a.witness.iter().map(|c| c.weight).sum();
        assert!((wsum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_density_ranks() {
        let shape = BipartiteShape::new(2, 3).unwrap();
        let pure = random_density(shape, 1, 5).unwrap();
        assert!((pure.spectrum().unwrap()[0] - 1.0).abs() < 1e-12);
        let full = random_density(shape, 6, 5).unwrap();
        let spec = full.spectrum().unwrap();
        assert!(spec[5] > 0.0);
        assert!((spec.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(random_density(shape, 6, 5).unwrap(), full);
        assert!(matches!(random_density(shape, 7, 0), Err(Error::RankOutOfRange { rank: 7, dim: 6 })));
        assert!(matches!(random_density(shape, 0, 0), Err(Error::RankOutOfRange { .. })));
    }

    #[test]
    fn family_spec_parsing_and_build() {
        let spec = FamilySpec::parse("werner", &["p=0.25".to_string()]).unwrap();
        assert_eq!(spec.params["p"], 0.25);
        assert_eq!(spec.build().unwrap().state, werner(0.25).unwrap());
        assert!(matches!(FamilySpec::new("nope").build(), Err(Error::UnknownFamily(_))));
        assert!(FamilySpec::parse("werner", &["p".to_string()]).is_err());
        assert!(FamilySpec::new("werner").build().is_err());
        assert!(FamilySpec::new("werner").with("q", 0.1).build().is_err());
        let mm = FamilySpec::new("maximally-mixed").with("da", 3.0).build().unwrap();
        assert_eq!(mm.state.shape(), BipartiteShape::new(3, 2).unwrap());
        for info in families() {
            assert!(!info.params.is_empty());
        }
    }
}
