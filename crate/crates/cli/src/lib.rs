//! Configuration-driven experiments on top of `quench-core`.
//!
//! Each subcommand writes one CSV table, a `.meta.json` sidecar with the
//! resolved configuration, and for `tpm-run` a `.report.txt` key-value block.

pub mod config;
pub mod error;
pub mod experiments;
pub mod operator_file;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use toml::Table;

use config::{
    ExperimentKind, GenericQuenchParams, IsingFiniteNParams, LzSweepParams, Resolved, TpmRunParams,
    XyAnisotropySweepParams, XyFieldSweepParams,
};
pub use error::{CliError, Result};
use output::{metadata, sidecar_path, write_file, Artifacts};

#[derive(Debug, Parser)]
#[command(name = "quench", version, about = "Entropy production of sudden quenches: sweeps, fluctuation theorems and generic budgets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output CSV path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for sampling and for the choice of verified rows.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Re-run the budget identities on 1% of the emitted rows.
    #[arg(long, global = true)]
    pub verify: bool,

    /// Override a config key, e.g. `--set grid.points=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Landau-Zener budgets against the initial field.
    LzSweep,
    /// XY chain budgets against the field, one curve per anisotropy.
    XyFieldSweep,
    /// XY chain budgets against the anisotropy, one curve per field.
    XyAnisotropySweep,
    /// High-temperature Ising sums for several chain lengths.
    IsingFiniteN,
    /// Two-point-measurement trajectories and fluctuation theorems.
    TpmRun,
    /// Budget of a quench read from operator files.
    GenericQuench,
}

impl Command {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Command::LzSweep => ExperimentKind::LzSweep,
            Command::XyFieldSweep => ExperimentKind::XyFieldSweep,
            Command::XyAnisotropySweep => ExperimentKind::XyAnisotropySweep,
            Command::IsingFiniteN => ExperimentKind::IsingFiniteN,
            Command::TpmRun => ExperimentKind::TpmRun,
            Command::GenericQuench => ExperimentKind::GenericQuench,
        }
    }
}

/// What a run wrote.
#[derive(Debug, Clone)]
pub struct Summary {
    pub out: PathBuf,
    pub rows: usize,
    pub verified_rows: usize,
    pub report: Option<String>,
}

fn execute<P: Serialize>(params: &P, run: impl FnOnce(&P) -> Result<Artifacts>) -> Result<(serde_json::Value, Artifacts)> {
    let json = serde_json::to_value(params).expect("parameters are serializable");
    Ok((json, run(params)?))
}

fn dispatch(cfg: &Resolved, verify: bool) -> Result<(serde_json::Value, Artifacts)> {
    let spot = verify.then_some(cfg.seed);
    match cfg.kind {
        ExperimentKind::LzSweep => execute(&cfg.params_or(&LzSweepParams::default())?, |p| experiments::lz_sweep(p, spot)),
        ExperimentKind::XyFieldSweep => {
            execute(&cfg.params_or(&XyFieldSweepParams::default())?, |p| experiments::xy_field_sweep(p, spot))
        }
        ExperimentKind::XyAnisotropySweep => {
            execute(&cfg.params_or(&XyAnisotropySweepParams::default())?, |p| experiments::xy_anisotropy_sweep(p, spot))
        }
        ExperimentKind::IsingFiniteN => {
            execute(&cfg.params_or(&IsingFiniteNParams::default())?, |p| experiments::ising_finite_n(p, spot))
        }
        ExperimentKind::TpmRun => {
            execute(&cfg.params_or(&TpmRunParams::default())?, |p| experiments::tpm_run(p, cfg.seed, verify))
        }
        ExperimentKind::GenericQuench => {
            execute(&cfg.params::<GenericQuenchParams>()?, |p| experiments::generic_quench(p, spot))
        }
    }
}

pub fn run(cli: &Cli) -> Result<Summary> {
    let table = match &cli.config {
        Some(path) => config::read_config_file(path)?,
        None => Table::new(),
    };
    let cfg = config::resolve(cli.command.kind(), table, &cli.overrides, cli.out.clone(), cli.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(match cli.threads {
            Some(0) => return Err(CliError::config("--threads must be positive")),
            Some(n) => n,
            None => 0,
        })
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    let threads = pool.current_num_threads();
    let (params, artifacts) = pool.install(|| dispatch(&cfg, cli.verify))?;

    write_file(&cfg.out, &artifacts.table.render())?;
    if let Some(report) = &artifacts.report {
        write_file(&sidecar_path(&cfg.out, ".report.txt"), report)?;
    }
    write_file(&sidecar_path(&cfg.out, ".meta.json"), &metadata(&cfg, params, threads, artifacts.verified_rows))?;
    log::info!("{}: {} rows written to {}", cfg.kind.name(), artifacts.table.rows.len(), cfg.out.display());
    Ok(Summary {
        out: cfg.out,
        rows: artifacts.table.rows.len(),
        verified_rows: artifacts.verified_rows,
        report: artifacts.report,
    })
}
