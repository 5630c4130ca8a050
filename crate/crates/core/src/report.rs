//! State files, command drivers and report rendering for the CLI.
//!
//! Reports contain no timestamps or host data, so identical inputs and seeds
//! give byte-identical output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{run_all_criteria_with, CriteriaSummary, CriterionKind, SpectrumVector, Tolerances};
use crate::linalg::{ComplexMatrix, C64};
use crate::prodspan::{certify_separable, lpbs_estimate_for_ensemble, verify_theorem1_for_ensemble, LpbsReport, Theorem1Report};
use crate::state::{BipartiteShape, DensityMatrix, EigenEnsemble};
use crate::typicality::{typicality_convergence, ConvergenceRow};
use crate::zoo::{families, FamilyInfo, FamilySpec};
use crate::{Error, LinalgError, Result};

pub const TOOL: &str = "sepcheck";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit status for an error: 3 for resource caps, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Linalg(LinalgError::SizeOverflow { .. }) | Error::TooManyStrings { .. } => 3,
        _ => 2,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

/// On-disk density matrix: row-major `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<StateMetadata>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix, metadata: Option<StateMetadata>) -> Self {
        let m = rho.matrix();
        let matrix = (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { dim_a: rho.shape().dim_a, dim_b: rho.shape().dim_b, matrix, metadata }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            context: format!("state file line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { context: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("state file serializes");
        s.push('\n');
        s
    }

    /// Validated density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let shape = BipartiteShape::new(self.dim_a, self.dim_b)?;
        let d = shape.total();
        if self.matrix.len() != d {
            return Err(Error::Parse {
                context: "state file field `matrix`".into(),
                message: format!("expected {d} rows for shape {shape}, found {}", self.matrix.len()),
            });
        }
        let mut data = Vec::with_capacity(d * d);
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Parse {
                    context: format!("state file field `matrix[{i}]`"),
                    message: format!("expected {d} entries, found {}", row.len()),
                });
            }
            data.extend(row.iter().map(|[re, im]| C64::new(*re, *im)));
        }
        DensityMatrix::new(shape, ComplexMatrix::from_vec(d, d, data)?)
    }
}

/// Where a state comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    File(PathBuf),
    Family(FamilySpec),
}

impl StateSource {
    /// Exactly one of `file` and `family` must be given.
    pub fn from_flags(file: Option<PathBuf>, family: Option<String>, params: &[String]) -> Result<Self> {
        match (file, family) {
            (Some(p), None) if params.is_empty() => Ok(StateSource::File(p)),
            (Some(_), None) => Err(Error::Parse { context: "--param".into(), message: "only valid with --family".into() }),
            (None, Some(f)) => Ok(StateSource::Family(FamilySpec::parse(&f, params)?)),
            (Some(_), Some(_)) => {
                Err(Error::Parse { context: "--state/--family".into(), message: "give only one state source".into() })
            }
            (None, None) => Err(Error::Parse { context: "--state/--family".into(), message: "a state source is required".into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputEcho {
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<BipartiteShape>,
    /// Whether `avg-ent`, strings and certificates use a declared eigenbasis.
    pub declared_eigenbasis: bool,
}

/// A state with the eigen-ensemble used for basis-dependent quantities.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub echo: InputEcho,
    pub state: DensityMatrix,
    pub declared: Option<EigenEnsemble>,
}

impl LoadedState {
    pub fn load(source: &StateSource) -> Result<Self> {
        match source {
            StateSource::File(path) => {
                let state = StateFile::load(path)?.to_density()?;
                Ok(Self {
                    echo: InputEcho {
                        source: "file",
                        path: Some(path.display().to_string()),
                        family: None,
                        params: BTreeMap::new(),
                        spectrum: None,
                        shape: Some(state.shape()),
                        declared_eigenbasis: false,
                    },
                    state,
                    declared: None,
                })
            }
            StateSource::Family(spec) => {
                let built = spec.build()?;
                let info = spec.info()?;
                let mut params: BTreeMap<String, f64> =
                    info.params.iter().filter_map(|p| p.default.map(|d| (p.name.to_string(), d))).collect();
                params.extend(spec.params.clone());
                Ok(Self {
                    echo: InputEcho {
                        source: "family",
                        path: None,
                        family: Some(spec.family.clone()),
                        params,
                        spectrum: None,
                        shape: Some(built.state.shape()),
                        declared_eigenbasis: built.ensemble.is_some(),
                    },
                    state: built.state,
                    declared: built.ensemble,
                })
            }
        }
    }

    /// Declared ensemble, or the eigensolver's.
    pub fn ensemble(&self) -> Result<EigenEnsemble> {
        match &self.declared {
            Some(e) => Ok(e.clone()),
            None => EigenEnsemble::of(&self.state),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: InputEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<CriteriaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typicality: Option<TypicalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prodspan: Option<ProdspanReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    fn new(command: &'static str, input: InputEcho, tol: &Tolerances) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            input,
            seed: None,
            tolerances: *tol,
            criteria: None,
            typicality: None,
            prodspan: None,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn validate_tolerances(tol: &Tolerances) -> Result<()> {
    if !(tol.rank > 0.0 && tol.rank < 1.0) {
        return Err(Error::ParamOutOfRange { name: "tol-rank".into(), value: tol.rank, domain: "(0, 1)".into() });
    }
    if !(tol.criterion >= 0.0 && tol.criterion.is_finite()) {
        return Err(Error::ParamOutOfRange { name: "tol-criterion".into(), value: tol.criterion, domain: "[0, inf)".into() });
    }
    Ok(())
}

pub fn cmd_analyze(source: &StateSource, criteria: &[CriterionKind], tol: &Tolerances) -> Result<Report> {
    validate_tolerances(tol)?;
    let loaded = LoadedState::load(source)?;
    let summary = run_all_criteria_with(&loaded.state, loaded.declared.as_ref(), criteria, tol)?;
    let mut report = Report::new("analyze", loaded.echo, tol);
    report.criteria = Some(summary);
    Ok(report)
}

/// `START:STOP:STEP`, inclusive of `STOP` up to roundoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self> {
        let err = |message: String| Error::Parse { context: format!("--grid {s}"), message };
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(err("expected START:STOP:STEP".into()));
        }
        let mut vals = [0.0f64; 3];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p.trim().parse().map_err(|_| err(format!("`{p}` is not a number")))?;
        }
        let [start, stop, step] = vals;
        if !(step > 0.0 && step.is_finite()) {
            return Err(err("STEP must be positive".into()));
        }
        if !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(err("STOP must not be below START".into()));
        }
        Ok(Self { start, stop, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        // rounding keeps 0.1·3 from printing as 0.30000000000000004
        (0..count).map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12).collect()
    }
}

/// Sweep output: a fixed header and one row per grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub family: String,
    pub param: String,
    pub tolerances: Tolerances,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SweepTable {
    pub fn to_csv(&self) -> Result<String> {
        write_csv(&self.columns, &self.rows)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep serializes");
        s.push('\n');
        s
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn write_csv(columns: &[String], rows: &[Vec<String>]) -> Result<String> {
    let io = |e: csv::Error| Error::Parse { context: "csv output".into(), message: e.to_string() };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse { context: "csv output".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn sweep_columns(param: &str, kinds: &[CriterionKind]) -> Vec<String> {
    let mut cols = vec![param.to_string()];
    for k in kinds {
        let prefix = k.name().replace('-', "_");
        cols.push(format!("{prefix}_outcome"));
        cols.push(format!("{prefix}_boundary"));
        cols.extend(k.evidence_keys().iter().map(|e| format!("{prefix}_{e}")));
    }
    cols.push("combined".into());
    cols
}

fn sweep_row(value: f64, kinds: &[CriterionKind], summary: &CriteriaSummary) -> Vec<String> {
    let mut row = vec![value.to_string()];
    for (k, v) in kinds.iter().zip(&summary.verdicts) {
        row.push(v.outcome.name().to_string());
        row.push(v.boundary.to_string());
        row.extend(k.evidence_keys().iter().map(|e| v.evidence(e).map_or(String::new(), |x| x.to_string())));
    }
    row.push(summary.combined.name().to_string());
    row
}

/// Evaluates the criteria at every grid point of the family's sweep
/// parameter. `threads = None` uses the global pool.
pub fn cmd_sweep(
    family: &str,
    params: &[String],
    grid: &Grid,
    criteria: &[CriterionKind],
    tol: &Tolerances,
    threads: Option<usize>,
) -> Result<SweepTable> {
    validate_tolerances(tol)?;
    let base = FamilySpec::parse(family, params)?;
    let info = base.info()?;
    let param = info.sweep_param.ok_or_else(|| Error::Parse {
        context: format!("family {family}"),
        message: "this family has no sweep parameter".into(),
    })?;
    if base.params.contains_key(param) {
        return Err(Error::Parse { context: format!("--param {param}"), message: "swept by --grid".into() });
    }
    let kinds: Vec<CriterionKind> = if criteria.is_empty() { CriterionKind::ALL.to_vec() } else { criteria.to_vec() };
    let points = grid.points();
    let eval = || {
        points
            .par_iter()
            .map(|&x| {
                let built = base.clone().with(param, x).build()?;
                let summary = run_all_criteria_with(&built.state, built.ensemble.as_ref(), &kinds, tol)?;
                Ok(sweep_row(x, &kinds, &summary))
            })
            .collect::<Result<Vec<_>>>()
    };
    let rows = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Parse { context: "--threads".into(), message: e.to_string() })?
            .install(eval)?,
        None => eval()?,
    };
    Ok(SweepTable {
        family: family.to_string(),
        param: param.to_string(),
        tolerances: *tol,
        columns: sweep_columns(param, &kinds),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityReport {
    pub spectrum: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
}

impl TypicalityReport {
    pub fn to_csv(&self) -> Result<String> {
        let columns: Vec<String> = [
            "n",
            "counts",
            "exact_count",
            "log2_exact_count",
            "rate",
            "n_entropy",
            "gap",
            "string_probability",
            "typical_mass",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"),
                    r.exact_count.clone(),
                    r.log2_exact_count.to_string(),
                    r.rate.to_string(),
                    r.n_entropy.to_string(),
                    r.gap.to_string(),
                    r.string_probability.to_string(),
                    r.typical_mass.to_string(),
                ]
            })
            .collect();
        write_csv(&columns, &rows)
    }
}

pub enum TypicalitySource {
    Spectrum(Vec<f64>),
    State(StateSource),
}

pub fn cmd_typicality(source: &TypicalitySource, n_list: &[usize]) -> Result<Report> {
    let (echo, spectrum) = match source {
        TypicalitySource::Spectrum(values) => {
            let s = SpectrumVector::density(values.clone())?;
            let echo = InputEcho {
                source: "spectrum",
                path: None,
                family: None,
                params: BTreeMap::new(),
                spectrum: Some(s.values().to_vec()),
                shape: None,
                declared_eigenbasis: false,
            };
            (echo, s)
        }
        TypicalitySource::State(src) => {
            let loaded = LoadedState::load(src)?;
            let s = SpectrumVector::new(loaded.ensemble()?.weights().to_vec())?;
            (loaded.echo, s)
        }
    };
    let rows = typicality_convergence(&spectrum, n_list)?;
    let mut report = Report::new("typicality", echo, &Tolerances::default());
    report.typicality = Some(TypicalityReport { spectrum: spectrum.values().to_vec(), rows });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionEntry {
    pub weight: f64,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    /// `issued` or `refused`.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub change_of_basis: Option<Vec<Vec<C64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitarity_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction_error: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub decomposition: Vec<DecompositionEntry>,
}

impl CertificateReport {
    pub fn issued(&self) -> bool {
        self.status == "issued"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProdspanReport {
    pub n: usize,
    pub restarts: usize,
    pub theorem1: Theorem1Report,
    pub lpbs: LpbsReport,
    pub certificate: CertificateReport,
}

pub fn cmd_prodspan(source: &StateSource, n: usize, restarts: usize, seed: u64, tol: &Tolerances) -> Result<Report> {
    validate_tolerances(tol)?;
    let loaded = LoadedState::load(source)?;
    let ens = loaded.ensemble()?;
    let theorem1 = verify_theorem1_for_ensemble(&ens, n, restarts, seed, tol)?;
    let lpbs = lpbs_estimate_for_ensemble(&ens, n, restarts, seed, tol)?;
    let certificate = match certify_separable(&ens, n, &lpbs.family, tol) {
        Ok(cert) => CertificateReport {
            status: "issued",
            reason: None,
            change_of_basis: Some(
                (0..cert.change_of_basis.rows())
                    .map(|i| (0..cert.change_of_basis.cols()).map(|j| cert.change_of_basis[(i, j)]).collect())
                    .collect(),
            ),
            unitarity_deviation: Some(cert.unitarity_deviation),
            reconstruction_error: Some(cert.reconstruction_error),
            decomposition: cert
                .decomposition
                .iter()
                .zip(&lpbs.family.orthogonal_subfamily(tol)?.members)
                .map(|((w, _), m)| DecompositionEntry { weight: *w, a: m.a.clone(), b: m.b.clone() })
                .collect(),
        },
        Err(
            e @ (Error::NotOrthogonal { .. }
            | Error::CountMismatch { .. }
            | Error::NotUnitary { .. }
            | Error::ReconstructionMismatch { .. }),
        ) => CertificateReport {
            status: "refused",
            reason: Some(e.to_string()),
            change_of_basis: None,
            unitarity_deviation: match e {
                Error::NotUnitary { deviation } => Some(deviation),
                _ => None,
            },
            reconstruction_error: match e {
                Error::ReconstructionMismatch { error } => Some(error),
                _ => None,
            },
            decomposition: Vec::new(),
        },
        Err(e) => return Err(e),
    };

    let mut report = Report::new("prodspan", loaded.echo, tol);
    report.seed = Some(seed);
    if lpbs.lower_bound == 0 {
        report.notes.push(format!(
            "no product vectors found in {restarts} restarts; this bounds the search, it does not prove the range \
             contains no product vectors"
        ));
    } else if !lpbs.product_spanned {
        report.notes.push(format!(
            "{} independent product vectors found for a range of dimension {}; this is a lower bound",
            lpbs.lower_bound, lpbs.rank
        ));
    }
    if let Some(typ) = &theorem1.typical {
        if !typ.product_spanned {
            report.notes.push(format!(
                "likely-string span at n = {n} is not spanned by the product vectors found (best overlap {:.6})",
                typ.best_overlap
            ));
        }
    }
    if certificate.issued() {
        report.notes.push("separable: explicit product decomposition (theorem-3 certificate)".into());
    }
    report.prodspan = Some(ProdspanReport { n, restarts, theorem1, lpbs, certificate });
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZooListing {
    pub tool: &'static str,
    pub version: &'static str,
    pub families: Vec<FamilyInfo>,
}

pub fn cmd_zoo_list() -> ZooListing {
    ZooListing { tool: TOOL, version: VERSION, families: families() }
}

/// State file for one family member.
pub fn cmd_zoo_state(family: &str, params: &[String]) -> Result<StateFile> {
    let spec = FamilySpec::parse(family, params)?;
    let built = spec.build()?;
    let metadata = StateMetadata { name: None, family: Some(spec.family.clone()), params: spec.params.clone() };
    Ok(StateFile::from_density(&built.state, Some(metadata)))
}
