//! Separability checks for bipartite mixed states.
//!
//! The crate compares four necessary conditions for separability
//! (majorization of spectra, entropy ordering, positive partial transpose,
//! and average eigenstate entanglement against global entropy), counts the
//! likely strings of `σ^⊗n`, searches subspaces for product vectors, and
//! builds explicit product-state decompositions when the likely strings are
//! related to an orthogonal product basis by a unitary.

// `!(x < tol)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod linalg;
pub mod prodspan;
pub mod report;
pub mod state;
pub mod typicality;
pub mod zoo;

#[cfg(test)]
pub(crate) mod testutil;

use thiserror::Error;

pub use linalg::LinalgError;
pub use state::{BipartiteShape, DensityMatrix, PureState, Subsystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid bipartite shape {dim_a}x{dim_b}: both dimensions must be at least 2")]
    InvalidShape { dim_a: usize, dim_b: usize },
    #[error("invalid state: {invariant} (magnitude {magnitude:.3e})")]
    InvalidState { invariant: state::Invariant, magnitude: f64 },
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("weights sum to {sum}, expected 1")]
    WeightSumInvalid { sum: f64 },
    #[error("weight {0} must be positive and finite")]
    InvalidWeight(f64),
    #[error("vectors have different totals: {left} vs {right}")]
    TotalMismatch { left: f64, right: f64 },
    #[error("{count} likely strings exceed the materialization cap {cap}")]
    TooManyStrings { count: String, cap: usize },
    #[error("likely strings were not materialized")]
    NotMaterialized,
    #[error("product family is not orthonormal: max deviation {deviation:e}")]
    NotOrthogonal { deviation: f64 },
    #[error("{strings} strings but {family} product vectors")]
    CountMismatch { strings: usize, family: usize },
    #[error("change of basis is not unitary: max |A^H A - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },
    #[error("product decomposition misses the target mixture by {error:e}")]
    ReconstructionMismatch { error: f64 },
    #[error("parameter {name} = {value} outside {domain}")]
    ParamOutOfRange { name: String, value: f64, domain: String },
    #[error("rank {rank} outside 1..={dim}")]
    RankOutOfRange { rank: usize, dim: usize },
    #[error("unknown state family `{0}`")]
    UnknownFamily(String),
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
