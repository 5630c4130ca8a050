//! Necessary conditions for separability, each producing a
//! [`CriterionVerdict`] with the numbers that decided it.
//!
//! Outcomes are `ENTANGLED` or `INCONCLUSIVE`. The only route to
//! `SEPARABLE_CERTIFIED` here is PPT on `2⊗2` and `2⊗3`, where it is also
//! sufficient; the product-span module can add a second one.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eig, DEFAULT_RANK_TOL};
use crate::state::{partial_trace, partial_transpose, von_neumann_entropy, DensityMatrix, EigenEnsemble, Subsystem};
use crate::{Error, Result};

/// Slack in `majorizes_leq` partial-sum comparisons.
pub const MAJORIZATION_SLACK: f64 = 1e-12;
/// Allowed difference between the totals of two compared vectors.
pub const TOTAL_TOL: f64 = 1e-9;
pub const DEFAULT_CRITERION_TOL: f64 = 1e-9;
/// Eigenvalue gaps below this make the eigenbasis ambiguous.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
    /// Margin every criterion inequality must exceed before flagging.
    pub criterion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rank: DEFAULT_RANK_TOL, criterion: DEFAULT_CRITERION_TOL }
    }
}

/// Real vector sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumVector(Vec<f64>);

impl SpectrumVector {
    /// Sorts `values` descending; rejects non-finite entries.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::ParamOutOfRange { name: "spectrum entry".into(), value: *bad, domain: "finite".into() });
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    /// Like [`SpectrumVector::new`] but also requires a probability vector
    /// (entries in `[−1e-10, 1]`, total 1 within `1e-9`).
    pub fn density(values: Vec<f64>) -> Result<Self> {
        let s = Self::new(values)?;
        if let Some(bad) = s.0.iter().find(|&&v| !(-1e-10..=1.0 + 1e-10).contains(&v)) {
            return Err(Error::ParamOutOfRange { name: "spectrum entry".into(), value: *bad, domain: "[0, 1]".into() });
        }
        let total = s.total();
        if (total - 1.0).abs() > TOTAL_TOL {
            return Err(Error::WeightSumInvalid { sum: total });
        }
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Partial-sum comparison of two vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Majorization {
    /// True iff every partial sum of `x` is at most that of `y` plus slack.
    pub holds: bool,
    /// `Σ_{i≤k} x_i − Σ_{i≤k} y_i` for `k = 1..=len`.
    pub gaps: Vec<f64>,
    /// Largest gap over proper prefixes (all prefixes for length 1).
    pub max_violation: f64,
    /// 1-based `k` attaining `max_violation`.
    pub worst_k: usize,
}

/// Checks `x ≺ y`; the shorter vector is zero-padded.
pub fn majorizes_leq(x: &SpectrumVector, y: &SpectrumVector) -> Result<Majorization> {
    let (tx, ty) = (x.total(), y.total());
    if (tx - ty).abs() > TOTAL_TOL {
        return Err(Error::TotalMismatch { left: tx, right: ty });
    }
    let len = x.len().max(y.len()).max(1);
    let at = |v: &SpectrumVector, i: usize| v.0.get(i).copied().unwrap_or(0.0);
    let mut gaps = Vec::with_capacity(len);
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in 0..len {
        sx += at(x, i);
        sy += at(y, i);
        gaps.push(sx - sy);
    }
    let holds = gaps.iter().all(|&g| g <= MAJORIZATION_SLACK);
    let prefixes = if len > 1 { len - 1 } else { 1 };
    let (worst, max_violation) = gaps[..prefixes]
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, g)| if g > best.1 { (k, g) } else { best });
    Ok(Majorization { holds, gaps, max_violation, worst_k: worst + 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    Inorder,
    Entropic,
    Ppt,
    AvgEnt,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 4] =
        [CriterionKind::Inorder, CriterionKind::Entropic, CriterionKind::Ppt, CriterionKind::AvgEnt];

    pub fn name(&self) -> &'static str {
        match self {
            CriterionKind::Inorder => "inorder",
            CriterionKind::Entropic => "entropic",
            CriterionKind::Ppt => "ppt",
            CriterionKind::AvgEnt => "avg-ent",
        }
    }

    /// Evidence keys every verdict of this kind carries, in column order.
    pub fn evidence_keys(&self) -> &'static [&'static str] {
        match self {
            CriterionKind::Inorder => &["max_violation", "violation_a", "k_a", "violation_b", "k_b"],
            CriterionKind::Entropic => &["entropy_ab", "entropy_a", "entropy_b", "entropy_gap"],
            CriterionKind::Ppt => &["min_pt_eigenvalue"],
            CriterionKind::AvgEnt => &["avg_entanglement", "entropy", "gap"],
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Parse {
                context: "--criteria".into(),
                message: format!("unknown criterion `{s}` (expected inorder, entropic, ppt, avg-ent)"),
            })
    }

    /// Comma-separated list; empty input selects every criterion.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let k = Self::parse(part)?;
            if !out.contains(&k) {
                out.push(k);
            }
        }
        if out.is_empty() {
            out = Self::ALL.to_vec();
        }
        Ok(out)
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Entangled,
    Inconclusive,
    SeparableCertified,
}

impl Outcome {
    pub fn is_entangled(&self) -> bool {
        matches!(self, Outcome::Entangled)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Entangled => "ENTANGLED",
            Outcome::Inconclusive => "INCONCLUSIVE",
            Outcome::SeparableCertified => "SEPARABLE_CERTIFIED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub criterion: CriterionKind,
    pub outcome: Outcome,
    pub evidence: BTreeMap<String, f64>,
    /// The deciding inequality is within tolerance of equality.
    pub boundary: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CriterionVerdict {
    fn new(criterion: CriterionKind, decisive: f64, tol: f64) -> Self {
        Self {
            criterion,
            outcome: if decisive > tol { Outcome::Entangled } else { Outcome::Inconclusive },
            evidence: BTreeMap::new(),
            boundary: decisive.abs() <= tol,
            certificate: None,
            warnings: Vec::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.evidence.insert(key.to_string(), value);
        self
    }

    pub fn evidence(&self, key: &str) -> Option<f64> {
        self.evidence.get(key).copied()
    }
}

fn local_spectrum(rho: &DensityMatrix, keep: Subsystem) -> Result<SpectrumVector> {
    SpectrumVector::new(hermitian_eig(&partial_trace(rho, keep))?.eigenvalues)
}

/// Flags when the global spectrum fails to be majorized by either local one.
pub fn inorder_criterion(rho: &DensityMatrix, tol: &Tolerances) -> Result<CriterionVerdict> {
    let global = SpectrumVector::new(rho.spectrum()?)?;
    let a = majorizes_leq(&global, &local_spectrum(rho, Subsystem::A)?)?;
    let b = majorizes_leq(&global, &local_spectrum(rho, Subsystem::B)?)?;
    let worst = a.max_violation.max(b.max_violation);
    Ok(CriterionVerdict::new(CriterionKind::Inorder, worst, tol.criterion)
        .with("max_violation", worst)
        .with("violation_a", a.max_violation)
        .with("k_a", a.worst_k as f64)
        .with("violation_b", b.max_violation)
        .with("k_b", b.worst_k as f64))
}

/// Flags when a local entropy exceeds the global one.
pub fn entropic_criterion(rho: &DensityMatrix, tol: &Tolerances) -> Result<CriterionVerdict> {
    let s_ab = rho.entropy()?;
    let s_a = von_neumann_entropy(&partial_trace(rho, Subsystem::A))?;
    let s_b = von_neumann_entropy(&partial_trace(rho, Subsystem::B))?;
    let gap = s_a.max(s_b) - s_ab;
    Ok(CriterionVerdict::new(CriterionKind::Entropic, gap, tol.criterion)
        .with("entropy_ab", s_ab)
        .with("entropy_a", s_a)
        .with("entropy_b", s_b)
        .with("entropy_gap", gap))
}

/// Flags a negative eigenvalue of the partial transpose. A pass certifies
/// separability in `2⊗2` and `2⊗3` (either order).
pub fn ppt_criterion(rho: &DensityMatrix, tol: &Tolerances) -> Result<CriterionVerdict> {
    let pt = partial_transpose(rho, Subsystem::B);
    let min = hermitian_eig(&pt)?.eigenvalues.last().copied().unwrap_or(0.0);
    let mut v = CriterionVerdict::new(CriterionKind::Ppt, -min, tol.criterion).with("min_pt_eigenvalue", min);
    let shape = rho.shape();
    let (lo, hi) = (shape.dim_a.min(shape.dim_b), shape.dim_a.max(shape.dim_b));
    if !v.outcome.is_entangled() && lo == 2 && hi <= 3 {
        v.outcome = Outcome::SeparableCertified;
        v.certificate = Some(format!("PPT-2x{hi}"));
    }
    Ok(v)
}

/// Flags `Ē > S` using the eigensolver's eigenbasis.
pub fn average_entanglement_criterion(rho: &DensityMatrix, tol: &Tolerances) -> Result<CriterionVerdict> {
    average_entanglement_for_ensemble(&EigenEnsemble::of(rho)?, tol)
}

/// Flags `Σ λ_i E(Φ_i) > S(σ)` for a given eigen-ensemble.
pub fn average_entanglement_for_ensemble(ens: &EigenEnsemble, tol: &Tolerances) -> Result<CriterionVerdict> {
    let avg = ens.average_entanglement()?;
    let s = ens.entropy();
    let gap = avg - s;
    let mut v = CriterionVerdict::new(CriterionKind::AvgEnt, gap, tol.criterion)
        .with("avg_entanglement", avg)
        .with("entropy", s)
        .with("gap", gap);
    if let Some(min_gap) = ens.min_gap().filter(|g| *g < DEGENERACY_GAP) {
        v.evidence.insert("min_eigenvalue_gap".into(), min_gap);
        v.warnings.push(
            "degenerate spectrum: the eigenbasis is not unique and the average entanglement \
             refers to the computed basis"
                .into(),
        );
    }
    Ok(v)
}

pub fn run_criterion(kind: CriterionKind, rho: &DensityMatrix, tol: &Tolerances) -> Result<CriterionVerdict> {
    match kind {
        CriterionKind::Inorder => inorder_criterion(rho, tol),
        CriterionKind::Entropic => entropic_criterion(rho, tol),
        CriterionKind::Ppt => ppt_criterion(rho, tol),
        CriterionKind::AvgEnt => average_entanglement_criterion(rho, tol),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaSummary {
    pub verdicts: Vec<CriterionVerdict>,
    pub combined: Outcome,
    /// Name of the certificate behind a `SEPARABLE_CERTIFIED` combined verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
}

impl CriteriaSummary {
    pub fn from_verdicts(verdicts: Vec<CriterionVerdict>) -> Self {
        let mut summary = Self { verdicts, combined: Outcome::Inconclusive, certificate: None };
        if summary.verdicts.iter().any(|v| v.outcome.is_entangled()) {
            summary.combined = Outcome::Entangled;
        } else if let Some(v) = summary.verdicts.iter().find(|v| v.outcome == Outcome::SeparableCertified) {
            summary.combined = Outcome::SeparableCertified;
            summary.certificate = v.certificate.clone();
        }
        summary
    }

    /// Records an explicit product decomposition as a certificate. Has no
    /// effect if a criterion already flagged entanglement.
    pub fn add_theorem3_certificate(&mut self) {
        if self.combined == Outcome::Inconclusive {
            self.combined = Outcome::SeparableCertified;
            self.certificate = Some("theorem-3".into());
        }
    }

    pub fn verdict(&self, kind: CriterionKind) -> Option<&CriterionVerdict> {
        self.verdicts.iter().find(|v| v.criterion == kind)
    }
}

/// Runs the selected criteria (all when `selection` is empty) in parallel;
/// verdicts come back in selection order.
pub fn run_all_criteria(rho: &DensityMatrix, selection: &[CriterionKind], tol: &Tolerances) -> Result<CriteriaSummary> {
    run_all_criteria_with(rho, None, selection, tol)
}

/// As [`run_all_criteria`], but `avg-ent` uses `ensemble` when given instead
/// of the eigensolver's basis.
pub fn run_all_criteria_with(
    rho: &DensityMatrix,
    ensemble: Option<&EigenEnsemble>,
    selection: &[CriterionKind],
    tol: &Tolerances,
) -> Result<CriteriaSummary> {
    let kinds: Vec<CriterionKind> = if selection.is_empty() { CriterionKind::ALL.to_vec() } else { selection.to_vec() };
    let verdicts = kinds
        .par_iter()
        .map(|&k| match (k, ensemble) {
            (CriterionKind::AvgEnt, Some(ens)) => average_entanglement_for_ensemble(ens, tol),
            _ => run_criterion(k, rho, tol),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriteriaSummary::from_verdicts(verdicts))
}
