//! Experiment configs: parsing with path-level diagnostics, execution,
//! assertions and artifact files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::experiments::{
    axiom_scan, consistency_scan, dgr_scan, lowerbound_scan, lowerbound_threshold, norm_scan, random_polynomial,
    remainder_scan, RandomPolySpec, ScanContext,
};
use crate::harness::json::{validate_polynomial, HamiltonianJson, PolynomialJson, TensorJson};
use crate::harness::scan::{NRange, ScanResult, FIT_FLOOR};
use crate::norm::{Engine, NormOptions};
use crate::symbolic::{decompose, GammaPolynomial, LocalTensor};
use crate::tensor_ops::checked_pow;
use crate::tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NormScan,
    DgrScan,
    RemainderScan,
    ConsistencyScan,
    AxiomScan,
    LowerboundScan,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::NormScan => "norm_scan",
            ExperimentKind::DgrScan => "dgr_scan",
            ExperimentKind::RemainderScan => "remainder_scan",
            ExperimentKind::ConsistencyScan => "consistency_scan",
            ExperimentKind::AxiomScan => "axiom_scan",
            ExperimentKind::LowerboundScan => "lowerbound_scan",
        }
    }
}

/// Where a polynomial input comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolySource {
    Polynomial(PolynomialJson),
    /// The γ-class of a single local tensor.
    Tensor(TensorJson),
    /// Drawn from the experiment seed.
    Random(RandomPolySpec),
    /// The symbol of `H_N / N`.
    Hamiltonian(HamiltonianJson),
}

impl PolySource {
    /// `slot` decorrelates several random inputs drawn from one seed.
    pub fn resolve(&self, kappa: usize, seed: u64, slot: u64) -> Result<GammaPolynomial> {
        match self {
            PolySource::Polynomial(p) => GammaPolynomial::try_from(p),
            PolySource::Tensor(t) => Ok(GammaPolynomial::from_tensor(&LocalTensor::try_from(t)?)),
            PolySource::Random(spec) => Ok(random_polynomial(spec, kappa, seed.wrapping_add(slot))),
            PolySource::Hamiltonian(h) => {
                if h.kappa() != kappa {
                    return Err(Error::DimensionMismatch { expected: kappa, got: h.kappa() });
                }
                h.symbol()
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PolySource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<PolySource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<PolySource>,
    /// Local tensor for consistency and lower-bound scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<TensorJson>,
    /// Chain length N of the source sequence in a consistency scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_sites: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

/// Tail extrapolations over all rows and over rows with N ≤ `n_max` agree within `tol`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitDrift {
    pub n_max: usize,
    pub tol: f64,
}

/// Checks on a scan result; every one that is set must hold.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    /// Fitted log-log slope at most this; an all-zero tail passes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_tail_value: Option<f64>,
    /// Tail stays above the lower-bound threshold of the decomposition.
    #[serde(default)]
    pub above_threshold: bool,
    /// Every value at most its reference column.
    #[serde(default)]
    pub below_reference: bool,
    /// Successive tail differences non-increasing up to this tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_non_increasing: Option<f64>,
    #[serde(default)]
    pub strictly_decreasing: bool,
    /// `max/min` of `N·value` over the tail at most this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_scaled_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_drift: Option<LimitDrift>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_symbolic_residual: Option<f64>,
    /// Otherwise any failed scan point fails the experiment.
    #[serde(default)]
    pub allow_point_failures: bool,
}

fn default_kappa() -> usize {
    2
}

fn default_seed() -> u64 {
    NormOptions::default().seed
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: ExperimentKind,
    #[serde(default = "default_kappa")]
    pub kappa: usize,
    #[serde(alias = "N_range")]
    pub n_range: NRange,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    /// Applied to the scan result (the Jacobi rows of an axiom scan).
    #[serde(default)]
    pub assertions: Assertions,
    /// Applied to the Leibniz rows of an axiom scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leibniz_assertions: Option<Assertions>,
}

/// A config file: one experiment or `{"experiments": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub experiments: Vec<ExperimentConfig>,
}

impl Suite {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let wrapped = value.get("experiments").is_some();
        let suite = if wrapped {
            deserialize_value::<Suite>(value)?
        } else {
            Suite { experiments: vec![deserialize_value::<ExperimentConfig>(value)?] }
        };
        for (i, e) in suite.experiments.iter().enumerate() {
            e.validate().map_err(|err| match err {
                Error::Config { path, message } if wrapped => {
                    Error::Config { path: format!("experiments[{i}].{path}"), message }
                }
                other => other,
            })?;
        }
        Ok(suite)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn deserialize_value<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        self.n_range.validate().map_err(|e| config_error("n_range", e.to_string()))?;
        crate::site::build_basis(self.kappa).map_err(|e| config_error("kappa", e.to_string()))?;
        if self.engine == Engine::Dense {
            let dim = checked_pow(self.kappa, self.n_range.max).unwrap_or(usize::MAX);
            if dim > tolerance::DENSE_LIMIT {
                return Err(config_error(
                    "engine",
                    format!("dense engine at N = {} needs dimension {dim} > {}", self.n_range.max, tolerance::DENSE_LIMIT),
                ));
            }
        }
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(config_error(&format!("inputs.{field}"), format!("required by {}", self.kind.name())))
            }
        };
        let i = &self.inputs;
        match self.kind {
            ExperimentKind::NormScan => need(i.p.is_some(), "p"),
            ExperimentKind::DgrScan | ExperimentKind::RemainderScan => {
                need(i.p.is_some(), "p")?;
                need(i.q.is_some(), "q")
            }
            ExperimentKind::AxiomScan => {
                need(i.p.is_some(), "p")?;
                need(i.q.is_some(), "q")?;
                need(i.r.is_some(), "r")
            }
            ExperimentKind::ConsistencyScan => {
                need(i.tensor.is_some(), "tensor")?;
                need(i.base_sites.is_some(), "base_sites")
            }
            ExperimentKind::LowerboundScan => need(i.tensor.is_some(), "tensor"),
        }
    }

    fn poly(&self, source: &Option<PolySource>, slot: u64, ctx: &ScanContext) -> Result<GammaPolynomial> {
        let field = ["p", "q", "r"][slot as usize];
        let p = source
            .as_ref()
            .ok_or_else(|| config_error(&format!("inputs.{field}"), "missing"))?
            .resolve(self.kappa, self.seed, slot)?;
        validate_polynomial(&p, &ctx.basis)?;
        Ok(p)
    }

    fn tensor(&self) -> Result<LocalTensor> {
        LocalTensor::try_from(self.inputs.tensor.as_ref().ok_or_else(|| config_error("inputs.tensor", "missing"))?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub name: String,
    pub kind: ExperimentKind,
    pub kappa: usize,
    pub seed: u64,
    /// One result, or Leibniz then Jacobi for an axiom scan.
    pub results: Vec<ScanResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub assertions: Vec<AssertionOutcome>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// The result the main assertions apply to.
    pub fn primary(&self) -> &ScanResult {
        self.results.last().expect("every experiment produces a result")
    }
}

/// Runs one experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let ctx = ScanContext::new(cfg.kappa, NormOptions::default().with_engine(cfg.engine).with_seed(cfg.seed))?;
    let range = &cfg.n_range;
    let i = &cfg.inputs;
    let mut threshold = None;
    let results = match cfg.kind {
        ExperimentKind::NormScan => vec![norm_scan(&ctx, &cfg.poly(&i.p, 0, &ctx)?, range)],
        ExperimentKind::DgrScan => vec![dgr_scan(&ctx, &cfg.poly(&i.p, 0, &ctx)?, &cfg.poly(&i.q, 1, &ctx)?, range)?],
        ExperimentKind::RemainderScan => {
            vec![remainder_scan(&ctx, &cfg.poly(&i.p, 0, &ctx)?, &cfg.poly(&i.q, 1, &ctx)?, range)]
        }
        ExperimentKind::ConsistencyScan => {
            let base = i.base_sites.ok_or_else(|| config_error("inputs.base_sites", "missing"))?;
            vec![consistency_scan(&ctx, &cfg.tensor()?, base, range)?]
        }
        ExperimentKind::AxiomScan => {
            let (p, q, r) = (cfg.poly(&i.p, 0, &ctx)?, cfg.poly(&i.q, 1, &ctx)?, cfg.poly(&i.r, 2, &ctx)?);
            let (leibniz, jacobi) = axiom_scan(&ctx, &p, &q, &r, range)?;
            vec![leibniz, jacobi]
        }
        ExperimentKind::LowerboundScan => {
            let t = cfg.tensor()?;
            t.validate(&ctx.basis)?;
            let d = decompose(&t);
            threshold = lowerbound_threshold(&d, &ctx.basis)?;
            vec![lowerbound_scan(&ctx, &d, range)?]
        }
    };
    let mut assertions = check(&cfg.assertions, results.last().expect("nonempty"), threshold, "");
    if let (Some(a), ExperimentKind::AxiomScan) = (&cfg.leibniz_assertions, cfg.kind) {
        assertions.extend(check(a, &results[0], None, "leibniz."));
    }
    Ok(ExperimentOutcome { name: cfg.label(), kind: cfg.kind, kappa: cfg.kappa, seed: cfg.seed, results, threshold, assertions })
}

/// Evaluates the configured checks against a result.
pub fn check(a: &Assertions, r: &ScanResult, threshold: Option<f64>, prefix: &str) -> Vec<AssertionOutcome> {
    let mut out = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        out.push(AssertionOutcome { name: format!("{prefix}{name}"), passed, detail });
    };
    if !a.allow_point_failures {
        let detail = r.failures.iter().map(|f| format!("N={}: {}", f.n, f.message)).collect::<Vec<_>>().join("; ");
        push("all_points", r.failures.is_empty(), detail);
    }
    if r.rows.is_empty() {
        push("nonempty", false, "no rows".into());
        return out;
    }
    if let Some(max) = a.max_slope {
        match &r.fit {
            Some(fit) => push("max_slope", fit.slope <= max, format!("slope {:.4} (limit {max})", fit.slope)),
            None => {
                let zero = r.tail().iter().all(|row| row.value.abs() <= FIT_FLOOR);
                push("max_slope", zero, if zero { "tail identically zero".into() } else { "no fit".into() });
            }
        }
    }
    if let Some(max) = a.max_abs_value {
        let v = r.rows.iter().map(|row| row.value.abs()).fold(0.0, f64::max);
        push("max_abs_value", v <= max, format!("max {v:e} (limit {max:e})"));
    }
    if let Some(min) = a.min_tail_value {
        let v = r.tail().iter().map(|row| row.value).fold(f64::INFINITY, f64::min);
        push("min_tail_value", v >= min, format!("tail min {v:.6} (limit {min})"));
    }
    if a.above_threshold {
        match threshold {
            Some(t) => {
                let v = r.tail().iter().map(|row| row.value).fold(f64::INFINITY, f64::min);
                push("above_threshold", v >= t, format!("tail min {v:.6} (threshold {t:.6})"));
            }
            None => push("above_threshold", false, "no threshold for this input".into()),
        }
    }
    if a.below_reference {
        let bad: Vec<usize> = r
            .rows
            .iter()
            .filter(|row| row.reference.is_none_or(|n| row.value > n * (1.0 + tolerance::EXACT) + tolerance::EXACT))
            .map(|row| row.n)
            .collect();
        push("below_reference", bad.is_empty(), format!("violations at N = {bad:?}"));
    }
    if let Some(tol) = a.tail_non_increasing {
        let d = r.tail_differences();
        push("tail_non_increasing", r.tail_differences_non_increasing(tol), format!("tail differences {d:?}"));
    }
    if a.strictly_decreasing {
        let v: Vec<f64> = r.tail().iter().map(|row| row.value).collect();
        push("strictly_decreasing", r.tail_strictly_decreasing(), format!("tail {v:?}"));
    }
    if let Some(max) = a.max_scaled_ratio {
        match r.tail_scaled_ratio() {
            Some(ratio) => push("max_scaled_ratio", ratio <= max, format!("ratio {ratio:.4} (limit {max})")),
            None => push("max_scaled_ratio", false, "zero value in tail".into()),
        }
    }
    if let Some(drift) = a.limit_drift {
        let full = r.extrapolated_limit.as_ref().map(|l| l.alpha_inf);
        let cut = r.truncated(drift.n_max).extrapolated_limit.map(|l| l.alpha_inf);
        match (full, cut) {
            (Some(x), Some(y)) => push(
                "limit_drift",
                (x - y).abs() <= drift.tol,
                format!("limits {x:.6} vs {y:.6} (tol {})", drift.tol),
            ),
            _ => push("limit_drift", false, "not enough tail points to extrapolate".into()),
        }
    }
    if let Some(max) = a.max_symbolic_residual {
        match r.symbolic_residual {
            Some(v) => push("max_symbolic_residual", v <= max, format!("residual {v:e} (limit {max:e})")),
            None => push("max_symbolic_residual", false, "not computed".into()),
        }
    }
    out
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// `N,value` (plus `reference` when present); axiom scans give `N,leibniz,jacobi`.
pub fn to_csv(outcome: &ExperimentOutcome) -> String {
    let mut s = String::new();
    if outcome.kind == ExperimentKind::AxiomScan {
        let (l, j) = (&outcome.results[0], &outcome.results[1]);
        s.push_str("N,leibniz,jacobi\n");
        for row in &l.rows {
            let jv = j.rows.iter().find(|r| r.n == row.n).map(|r| sci(r.value)).unwrap_or_else(|| "nan".into());
            let _ = writeln!(s, "{},{},{}", row.n, sci(row.value), jv);
        }
        return s;
    }
    let r = outcome.primary();
    let with_ref = r.rows.iter().any(|row| row.reference.is_some());
    s.push_str(if with_ref { "N,value,reference\n" } else { "N,value\n" });
    for row in &r.rows {
        if with_ref {
            let reference = row.reference.map(sci).unwrap_or_else(|| "nan".into());
            let _ = writeln!(s, "{},{},{}", row.n, sci(row.value), reference);
        } else {
            let _ = writeln!(s, "{},{}", row.n, sci(row.value));
        }
    }
    s
}

/// The JSON summary written next to the CSV, or in its place.
pub fn to_json(outcome: &ExperimentOutcome) -> Result<String> {
    Ok(serde_json::to_string_pretty(outcome)?)
}

fn summary_path(path: &Path) -> PathBuf {
    let p = path.with_extension("json");
    if p == path {
        path.with_extension("summary.json")
    } else {
        p
    }
}

/// Writes the configured artifacts; returns the paths written.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &ExperimentOutcome) -> Result<Vec<PathBuf>> {
    let Some(out) = &cfg.output else { return Ok(Vec::new()) };
    if let Some(dir) = out.path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    match out.format {
        Format::Csv => {
            let summary = summary_path(&out.path);
            std::fs::write(&out.path, to_csv(outcome))?;
            std::fs::write(&summary, to_json(outcome)?)?;
            Ok(vec![out.path.clone(), summary])
        }
        Format::Json => {
            std::fs::write(&out.path, to_json(outcome)?)?;
            Ok(vec![out.path.clone()])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub outcomes: Vec<ExperimentOutcome>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(ExperimentOutcome::passed)
    }

    /// 0 when every assertion holds, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// One line per experiment, then one per failed assertion.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for o in &self.outcomes {
            let status = if o.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{status} {} ({} rows)", o.name, o.primary().rows.len());
            for a in o.assertions.iter().filter(|a| !a.passed) {
                let _ = writeln!(s, "  {}: {}", a.name, a.detail);
            }
        }
        s
    }
}

/// Executes every experiment and writes its artifacts.
pub fn run(suite: &Suite) -> Result<RunReport> {
    let mut outcomes = Vec::new();
    for cfg in &suite.experiments {
        let outcome = execute(cfg)?;
        write_outputs(cfg, &outcome)?;
        outcomes.push(outcome);
    }
    Ok(RunReport { outcomes })
}
