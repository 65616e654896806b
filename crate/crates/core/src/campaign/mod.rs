//! Verification campaigns: named checks that compare a computed value with an
//! expectation, evaluated in parallel and reported in name order.

mod commands;
mod lab;
mod verify;

pub use commands::{cocycle_checks, parse_tuple, residue_checks, suspend_checks, ElemSpec, KSpec};
pub use lab::Lab;
pub use verify::verify_checks;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Provenance, DEFAULT_THETA};
use crate::series::FitConfig;

/// Version of the JSON report layout.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Circle,
    Sphere,
    #[default]
    Nctorus,
}

impl ModelName {
    pub const ALL: [ModelName; 3] = [ModelName::Circle, ModelName::Sphere, ModelName::Nctorus];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Circle => "circle",
            ModelName::Sphere => "sphere",
            ModelName::Nctorus => "nctorus",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circle" | "s1" => Ok(ModelName::Circle),
            "sphere" | "s2" => Ok(ModelName::Sphere),
            "nctorus" | "torus" => Ok(ModelName::Nctorus),
            other => Err(Error::Config(format!("unknown model `{other}` (circle, sphere, nctorus)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub name: ModelName,
    /// Circle and torus cutoff `Λ`.
    pub lambda: usize,
    /// Sphere cutoff `Lmax`.
    pub lmax: u32,
    pub theta: f64,
    /// Truncation `M` of ℓ²(ℕ) in the suspension.
    pub suspension_size: usize,
    /// Generators tabulated by `residues`; all of them when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { name: ModelName::Nctorus, lambda: 60, lmax: 40, theta: DEFAULT_THETA, suspension_size: 40, generators: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSettings {
    /// `t_max / t_min` of the sample grid.
    pub ratio: f64,
    pub points: usize,
    /// Polynomial degree of the fit.
    pub degree: usize,
    pub eps_tail: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        let f = FitConfig::default();
        FitSettings { ratio: f.span, points: f.points, degree: f.degree, eps_tail: 1e-12 }
    }
}

impl FitSettings {
    pub fn fit_config(&self) -> FitConfig {
        FitConfig { span: self.ratio, points: self.points, degree: self.degree, ..FitConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format `{other}` (json, csv)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub fit: FitSettings,
    /// Overrides keyed by check name or by a dotted prefix of it.
    pub tolerances: BTreeMap<String, f64>,
    pub output: OutputConfig,
    /// Name filter: a glob, or a plain substring.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub only: Option<String>,
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&s)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Config(format!("tolerance `{k}` must be positive, got {v}")));
            }
        }
        let f = &self.fit;
        if !(f.ratio > 1.0) || f.points < f.degree + 2 || !(f.eps_tail > 0.0 && f.eps_tail < 1.0) {
            return Err(Error::Config(format!(
                "fit needs ratio > 1, points ≥ degree + 2 and 0 < eps_tail < 1, got {f:?}"
            )));
        }
        if self.model.suspension_size < 2 {
            return Err(Error::Config(format!("suspension size must be at least 2, got {}", self.model.suspension_size)));
        }
        if let Some(p) = &self.only {
            if is_glob(p) {
                glob::Pattern::new(p).map_err(|e| Error::Config(format!("bad pattern `{p}`: {e}")))?;
            }
        }
        Ok(())
    }

    /// Override for `name`: the exact key, else the longest dotted prefix.
    pub fn tolerance_override(&self, name: &str) -> Option<f64> {
        if let Some(v) = self.tolerances.get(name) {
            return Some(*v);
        }
        let mut end = name.len();
        while let Some(i) = name[..end].rfind('.') {
            if let Some(v) = self.tolerances.get(&name[..i]) {
                return Some(*v);
            }
            end = i;
        }
        None
    }
}

fn is_glob(p: &str) -> bool {
    p.contains(['*', '?', '['])
}

/// Whether `name` is selected by `pattern`.
pub fn name_matches(pattern: &str, name: &str) -> bool {
    if is_glob(pattern) {
        glob::Pattern::new(pattern).map(|p| p.matches(name)).unwrap_or(false)
    } else {
        name.contains(pattern)
    }
}

/// How a check's tolerance scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tol {
    Abs(f64),
    /// Relative to `|expected|`.
    Rel(f64),
    /// Within the combined error budget, and within `rel·|expected|` once
    /// `|expected|` exceeds both the budget and `10⁻⁶`.
    Budget { rel: f64 },
}

impl Tol {
    fn with(self, v: f64) -> Tol {
        match self {
            Tol::Abs(_) => Tol::Abs(v),
            Tol::Rel(_) => Tol::Rel(v),
            Tol::Budget { .. } => Tol::Budget { rel: v },
        }
    }

    fn absolute(self, expected: Option<C64>, budget: f64) -> f64 {
        let scale = expected.map_or(0.0, |e| e.norm());
        match self {
            Tol::Abs(v) => v,
            Tol::Rel(v) => v * scale,
            Tol::Budget { rel } if scale > budget.max(1e-6) => budget.min(rel * scale),
            Tol::Budget { .. } => budget,
        }
    }
}

/// Result of evaluating one check.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub expected: Option<C64>,
    pub computed: C64,
    /// Uncertainty of the comparison; the error itself when nothing is expected.
    pub error_budget: f64,
    pub tol: Tol,
    pub provenance: Provenance,
}

impl Outcome {
    pub fn new(expected: impl Into<Option<C64>>, computed: C64, tol: Tol, provenance: Provenance) -> Self {
        Outcome { expected: expected.into(), computed, error_budget: 0.0, tol, provenance }
    }

    pub fn budget(mut self, b: f64) -> Self {
        self.error_budget = b;
        self
    }
}

type CheckFn = Box<dyn Fn(&Lab) -> Result<Outcome> + Send + Sync>;

pub struct Check {
    pub name: String,
    eval: CheckFn,
}

impl Check {
    pub fn new(name: impl Into<String>, eval: impl Fn(&Lab) -> Result<Outcome> + Send + Sync + 'static) -> Self {
        Check { name: name.into(), eval: Box::new(eval) }
    }

    pub fn run(&self, lab: &Lab) -> CheckRecord {
        let start = Instant::now();
        let res = (self.eval)(lab);
        let runtime_ms = start.elapsed().as_millis() as u64;
        match res {
            Ok(o) => {
                let tol = lab.config().tolerance_override(&self.name).map_or(o.tol, |v| o.tol.with(v));
                let tolerance = tol.absolute(o.expected, o.error_budget);
                let abs_error = match o.expected {
                    Some(e) => (o.computed - e).norm(),
                    None => o.error_budget,
                };
                CheckRecord {
                    name: self.name.clone(),
                    expected: o.expected.map(Cplx::from),
                    computed: Some(o.computed.into()),
                    abs_error: abs_error.is_finite().then_some(abs_error),
                    tolerance,
                    pass: abs_error <= tolerance,
                    provenance: Some(o.provenance),
                    error_budget: o.error_budget,
                    error: None,
                    runtime_ms,
                }
            }
            Err(e) => CheckRecord {
                name: self.name.clone(),
                expected: None,
                computed: None,
                abs_error: None,
                tolerance: 0.0,
                pass: false,
                provenance: None,
                error_budget: 0.0,
                error: Some(e.to_string()),
                runtime_ms,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cplx {
    fn from(z: C64) -> Self {
        Cplx { re: z.re, im: z.im }
    }
}

impl From<Cplx> for C64 {
    fn from(z: Cplx) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub expected: Option<Cplx>,
    pub computed: Option<Cplx>,
    pub abs_error: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Option<Provenance>,
    pub error_budget: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Checks whose evaluation raised an error (counted in `failed`).
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub summary: Summary,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// One row per record; complex values split into real and imaginary columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(e.to_string());
        w.write_record([
            "name",
            "expected_re",
            "expected_im",
            "computed_re",
            "computed_im",
            "abs_error",
            "tolerance",
            "pass",
            "provenance",
            "error_budget",
            "runtime_ms",
            "error",
        ])
        .map_err(io)?;
        let num = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.records {
            let prov = r.provenance.and_then(|p| serde_json::to_value(p).ok());
            w.write_record([
                r.name.clone(),
                num(r.expected.map(|c| c.re)),
                num(r.expected.map(|c| c.im)),
                num(r.computed.map(|c| c.re)),
                num(r.computed.map(|c| c.im)),
                num(r.abs_error),
                num(Some(r.tolerance)),
                r.pass.to_string(),
                prov.and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
                num(Some(r.error_budget)),
                r.runtime_ms.to_string(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Evaluates the checks selected by the configured filter, in parallel.
pub fn run(command: &str, lab: &Lab, checks: Vec<Check>) -> Result<Report> {
    let only = lab.config().only.clone();
    let selected: Vec<Check> =
        checks.into_iter().filter(|c| only.as_deref().is_none_or(|p| name_matches(p, &c.name))).collect();
    let mut names: Vec<&str> = selected.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("duplicate check name `{}`", w[0])));
    }
    let mut records: Vec<CheckRecord> = selected.par_iter().map(|c| c.run(lab)).collect();
    records.sort_by(|a, b| a.name.cmp(&b.name));
    let passed = records.iter().filter(|r| r.pass).count();
    let errors = records.iter().filter(|r| r.error.is_some()).count();
    Ok(Report {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config: lab.config().clone(),
        summary: Summary { total: records.len(), passed, failed: records.len() - passed, errors },
        records,
    })
}
