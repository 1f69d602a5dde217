//! Experiment configuration.
//!
//! A config file is a TOML table. Keys shared by all experiments:
//!
//! ```toml
//! experiment = "lz-sweep"   # optional; must match the subcommand
//! out = "lz.csv"
//! seed = 7
//! ```
//!
//! Every other key belongs to the experiment and is listed on its parameter
//! struct below; unknown keys are rejected. `--set key=value` overrides a
//! key (dotted keys reach into sub-tables, values use TOML syntax and fall
//! back to plain strings), and the dedicated flags override both.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LzSweep,
    XyFieldSweep,
    XyAnisotropySweep,
    IsingFiniteN,
    TpmRun,
    GenericQuench,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::LzSweep => "lz-sweep",
            ExperimentKind::XyFieldSweep => "xy-field-sweep",
            ExperimentKind::XyAnisotropySweep => "xy-anisotropy-sweep",
            ExperimentKind::IsingFiniteN => "ising-finite-n",
            ExperimentKind::TpmRun => "tpm-run",
            ExperimentKind::GenericQuench => "generic-quench",
        }
    }
}

/// `points` equally spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(CliError::config("grid.points must be at least 1"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::config("grid bounds must be finite"));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| if i + 1 == self.points { self.stop } else { self.start + step * i as f64 }).collect())
    }
}

pub fn check_betas(betas: &[f64]) -> Result<()> {
    if betas.is_empty() {
        return Err(CliError::config("betas must be non-empty"));
    }
    if let Some(b) = betas.iter().find(|b| !b.is_finite() || **b < 0.0) {
        return Err(CliError::config(format!("betas must be finite and non-negative, got {b}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    Thermodynamic,
    SmallBeta,
    FiniteN,
    Extended,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LzSweepParams {
    pub delta: f64,
    pub b: f64,
    pub dg: f64,
    pub grid: Grid,
    pub betas: Vec<f64>,
}

impl Default for LzSweepParams {
    fn default() -> Self {
        Self { delta: 1.0, b: 0.01, dg: 1e-3, grid: Grid::new(-0.5, 1.5, 201), betas: vec![0.1, 1.0, 5.0, 10.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XyFieldSweepParams {
    /// One curve per anisotropy value.
    pub gammas: Vec<f64>,
    pub grid: Grid,
    pub betas: Vec<f64>,
    pub dg: f64,
    pub evaluation: Evaluation,
    /// Chain length for `finite_n` and `extended` evaluations.
    pub n: Option<usize>,
}

impl Default for XyFieldSweepParams {
    fn default() -> Self {
        Self {
            gammas: vec![0.25, 0.5, 0.75, 1.0],
            grid: Grid::new(-2.0, 2.0, 400),
            betas: vec![5.0, 3.0, 1.0, 0.1],
            dg: 1e-3,
            evaluation: Evaluation::Thermodynamic,
            n: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XyAnisotropySweepParams {
    /// One curve per field value.
    pub g0s: Vec<f64>,
    pub grid: Grid,
    pub betas: Vec<f64>,
    pub dgamma: f64,
    pub evaluation: Evaluation,
    pub n: Option<usize>,
}

impl Default for XyAnisotropySweepParams {
    fn default() -> Self {
        Self {
            g0s: vec![0.0, 0.5, 0.9, 1.5],
            grid: Grid::new(-1.0, 1.0, 400),
            betas: vec![5.0, 3.0, 1.0, 0.1],
            dgamma: 1e-3,
            evaluation: Evaluation::Thermodynamic,
            n: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsingFiniteNParams {
    pub sizes: Vec<usize>,
    pub grid: Grid,
    /// Adds the `N → ∞` rows for reference.
    pub include_limit: bool,
}

impl Default for IsingFiniteNParams {
    fn default() -> Self {
        Self { sizes: vec![8, 16, 32, 64, 128], grid: Grid::new(-2.0, 2.0, 400), include_limit: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TpmModel {
    LandauZener,
    Operators,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TpmRunParams {
    pub model: TpmModel,
    pub delta: f64,
    pub b: f64,
    pub g0: f64,
    pub dg: f64,
    /// Operator files for `model = "operators"`: `H = H0 + g H1`.
    pub h0: Option<PathBuf>,
    pub h1: Option<PathBuf>,
    pub beta: f64,
    /// Monte-Carlo sample count; 0 enumerates all trajectories exactly.
    pub samples: u64,
}

impl Default for TpmRunParams {
    fn default() -> Self {
        Self {
            model: TpmModel::LandauZener,
            delta: 1.0,
            b: 0.1,
            g0: 0.0,
            dg: 0.05,
            h0: None,
            h1: None,
            beta: 1.0,
            samples: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericQuenchParams {
    pub h0: PathBuf,
    pub h1: PathBuf,
    #[serde(default)]
    pub g0: f64,
    pub dg: f64,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
}

fn default_betas() -> Vec<f64> {
    vec![1.0]
}

/// Shared settings plus the experiment's own key table.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub kind: ExperimentKind,
    pub out: PathBuf,
    pub seed: u64,
    params: Table,
}

impl Resolved {
    /// Deserializes the experiment keys with no defaults beyond the
    /// struct's own `serde` attributes.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T> {
        self.parse(self.params.clone())
    }

    /// Deserializes the experiment keys laid over `defaults`, so that a
    /// partial sub-table such as `grid.points` keeps the other grid values.
    pub fn params_or<T: Serialize + DeserializeOwned>(&self, defaults: &T) -> Result<T> {
        let mut base = Table::try_from(defaults).expect("defaults serialize to a table");
        merge(&mut base, self.params.clone());
        self.parse(base)
    }

    fn parse<T: DeserializeOwned>(&self, table: Table) -> Result<T> {
        Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::config(format!("{}: {}", self.kind.name(), e.message())))
    }
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn read_config_file(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse::<Table>().map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message())))
}

/// Parses `--set key=value`; the value is read as TOML and falls back to a
/// plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects key=value, got {assignment:?}")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::config(format!("--set has an empty key in {assignment:?}")));
    }
    let value = format!("v = {}", raw.trim())
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("--set {key}: {part} is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Merges the config file, overrides and flags, in increasing precedence.
pub fn resolve(
    kind: ExperimentKind,
    mut table: Table,
    overrides: &[String],
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<Resolved> {
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(v) = table.remove("experiment") {
        let name = v.as_str().ok_or_else(|| CliError::config("experiment must be a string"))?;
        if name != kind.name() {
            return Err(CliError::config(format!("config is for {name:?} but the subcommand is {:?}", kind.name())));
        }
    }
    let file_out = match table.remove("out") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(CliError::config("out must be a string")),
        None => None,
    };
    let file_seed = match table.remove("seed") {
        Some(Value::Integer(s)) if s >= 0 => Some(s as u64),
        Some(_) => return Err(CliError::config("seed must be a non-negative integer")),
        None => None,
    };
    Ok(Resolved {
        kind,
        out: out.or(file_out).unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name()))),
        seed: seed.or(file_seed).unwrap_or(0),
        params: table,
    })
}
