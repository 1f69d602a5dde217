use quench_core::landau_zener::{self, LzParams, LzRow};
use quench_core::quench::{self, EntropyBudget, QuenchSpec};
use quench_core::tpm::{self, PathEnsemble};
use quench_core::xy_chain::{self, SweepAxis, XyEvaluation, XyParams, XyRow, XySweep};
use rayon::prelude::*;

use crate::config::{
    check_betas, Evaluation, GenericQuenchParams, IsingFiniteNParams, LzSweepParams, TpmModel, TpmRunParams,
    XyAnisotropySweepParams, XyFieldSweepParams,
};
use crate::error::{CliError, Result};
use crate::operator_file::load_operator_file;
use crate::output::{Artifacts, Cell, CsvTable};

/// Rows re-checked by `--verify`: every hundredth row, offset by the seed,
/// and at least one.
pub fn spot_check_indices(rows: usize, seed: u64) -> Vec<usize> {
    if rows == 0 {
        return Vec::new();
    }
    let idx: Vec<usize> = ((seed % 100) as usize..rows).step_by(100).collect();
    if idx.is_empty() {
        vec![(seed % rows as u64) as usize]
    } else {
        idx
    }
}

fn fail(what: String) -> CliError {
    CliError::Verification(what)
}

fn check_budget(b: &EntropyBudget, context: &str) -> Result<()> {
    let bad = b.check_invariants();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(fail(format!("{context}: {}", bad.join("; "))))
    }
}

pub fn lz_sweep(p: &LzSweepParams, verify: Option<u64>) -> Result<Artifacts> {
    check_betas(&p.betas)?;
    let grid = p.grid.values()?;
    let rows = landau_zener::sweep(p.delta, p.b, &grid, p.dg, &p.betas)?;
    let mut table = CsvTable::new(&LzRow::HEADER);
    for r in &rows {
        table.push(vec![r.g0.into(), r.beta.into(), r.sigma_scaled.into(), r.lcl_scaled.into(), r.lqu_scaled.into()]);
    }
    let mut verified = 0;
    if let Some(seed) = verify {
        for i in spot_check_indices(rows.len(), seed) {
            let r = &rows[i];
            verified += 1;
            if r.beta == 0.0 {
                continue;
            }
            let lz = LzParams::new(p.delta, p.b, r.g0)?;
            let generic = quench::budget(&landau_zener::quench(&lz, p.dg)?, r.beta)?;
            let context = format!("lz row {i} (g0 = {}, beta = {})", r.g0, r.beta);
            check_budget(&generic, &context)?;
            let analytic = landau_zener::budget_analytic(&lz, p.dg, r.beta)?;
            let floor = 1e-12 * 0.5 * (r.beta * p.dg).powi(2);
            for (x, y) in [(analytic.lambda_cl, generic.lambda_cl), (analytic.lambda_qu, generic.lambda_qu)] {
                if (x - y).abs() > 1e-6 * x.abs().max(y.abs()) + floor {
                    return Err(fail(format!("{context}: analytic {x:e} vs generic {y:e}")));
                }
            }
        }
    }
    Ok(Artifacts { table, report: None, verified_rows: verified })
}

fn xy_evaluation(e: Evaluation, n: Option<usize>) -> Result<XyEvaluation> {
    let need_n = || n.ok_or_else(|| CliError::config("evaluations finite_n and extended need the chain length n"));
    Ok(match e {
        Evaluation::Thermodynamic => XyEvaluation::Thermodynamic,
        Evaluation::SmallBeta => XyEvaluation::SmallBeta,
        Evaluation::FiniteN => XyEvaluation::FiniteN(need_n()?),
        Evaluation::Extended => XyEvaluation::Extended(need_n()?),
    })
}

fn xy_table(rows: &[XyRow]) -> CsvTable {
    let mut table = CsvTable::new(&XyRow::HEADER);
    for r in rows {
        table.push(vec![
            r.sweep_var.into(),
            r.beta.into(),
            r.n.map_or(Cell::from("inf"), Cell::from),
            r.lcl_scaled.into(),
            r.lqu_scaled.into(),
            r.sigma_scaled.into(),
            r.error_bound.into(),
            r.fixed_var.into(),
            r.label.into(),
        ]);
    }
    table
}

/// Re-runs the generic budget identities on the pair modes behind one row.
fn verify_xy_row(sweep: &XySweep, row: &XyRow, index: usize) -> Result<()> {
    let context = format!("xy row {index} ({} = {}, beta = {})", sweep_name(sweep.axis), row.sweep_var, row.beta);
    for v in [row.lcl_scaled, row.lqu_scaled, row.sigma_scaled] {
        if !v.is_finite() || v < -1e-12 {
            return Err(fail(format!("{context}: value {v:e}")));
        }
    }
    if row.beta == 0.0 {
        return Ok(());
    }
    let (g, gamma) = match sweep.axis {
        SweepAxis::Field { gamma0 } => (row.sweep_var, gamma0),
        SweepAxis::Anisotropy { g0 } => (g0, row.sweep_var),
    };
    let n = row.n.unwrap_or(64);
    let p = XyParams::finite(g, gamma, row.beta, sweep.dg, sweep.dgamma, n)?;
    for k in xy_chain::positive_momenta(n) {
        let (h, dh) = xy_chain::pair_mode_hamiltonian(&p, k)?;
        check_budget(&quench::budget(&QuenchSpec::direct(h, dh)?, row.beta)?, &format!("{context}, k = {k}"))?;
    }
    Ok(())
}

fn sweep_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Field { .. } => "g0",
        SweepAxis::Anisotropy { .. } => "gamma0",
    }
}

fn run_sweeps(sweeps: &[XySweep], verify: Option<u64>) -> Result<Artifacts> {
    let mut rows = Vec::new();
    let mut owner = Vec::new();
    for (s, sweep) in sweeps.iter().enumerate() {
        let r = sweep.run()?;
        owner.extend(std::iter::repeat_n(s, r.len()));
        rows.extend(r);
    }
    let mut verified = 0;
    if let Some(seed) = verify {
        for i in spot_check_indices(rows.len(), seed) {
            verify_xy_row(&sweeps[owner[i]], &rows[i], i)?;
            verified += 1;
        }
    }
    Ok(Artifacts { table: xy_table(&rows), report: None, verified_rows: verified })
}

pub fn xy_field_sweep(p: &XyFieldSweepParams, verify: Option<u64>) -> Result<Artifacts> {
    check_betas(&p.betas)?;
    if p.gammas.is_empty() {
        return Err(CliError::config("gammas must be non-empty"));
    }
    let evaluation = xy_evaluation(p.evaluation, p.n)?;
    let grid = p.grid.values()?;
    let sweeps: Vec<XySweep> = p
        .gammas
        .iter()
        .map(|&gamma0| XySweep {
            axis: SweepAxis::Field { gamma0 },
            grid: grid.clone(),
            betas: p.betas.clone(),
            dg: p.dg,
            dgamma: 0.0,
            evaluation,
        })
        .collect();
    run_sweeps(&sweeps, verify)
}

pub fn xy_anisotropy_sweep(p: &XyAnisotropySweepParams, verify: Option<u64>) -> Result<Artifacts> {
    check_betas(&p.betas)?;
    if p.g0s.is_empty() {
        return Err(CliError::config("g0s must be non-empty"));
    }
    let evaluation = xy_evaluation(p.evaluation, p.n)?;
    let grid = p.grid.values()?;
    let sweeps: Vec<XySweep> = p
        .g0s
        .iter()
        .map(|&g0| XySweep {
            axis: SweepAxis::Anisotropy { g0 },
            grid: grid.clone(),
            betas: p.betas.clone(),
            dg: 0.0,
            dgamma: p.dgamma,
            evaluation,
        })
        .collect();
    run_sweeps(&sweeps, verify)
}

/// High-temperature Ising sums for several chain lengths, scaled by `Nβ²δg²`.
pub fn ising_finite_n(p: &IsingFiniteNParams, verify: Option<u64>) -> Result<Artifacts> {
    if p.sizes.is_empty() {
        return Err(CliError::config("sizes must be non-empty"));
    }
    let grid = p.grid.values()?;
    let sweep = |evaluation| XySweep {
        axis: SweepAxis::Field { gamma0: 1.0 },
        grid: grid.clone(),
        betas: vec![0.0],
        dg: 1.0,
        dgamma: 0.0,
        evaluation,
    };
    let mut rows = Vec::new();
    for &n in &p.sizes {
        rows.extend(sweep(XyEvaluation::FiniteN(n)).run()?);
    }
    if p.include_limit {
        rows.extend(sweep(XyEvaluation::SmallBeta).run()?);
    }
    let mut verified = 0;
    if let Some(seed) = verify {
        for i in spot_check_indices(rows.len(), seed) {
            let r = &rows[i];
            let context = format!("ising row {i} (g0 = {}, N = {:?})", r.sweep_var, r.n);
            if (r.lcl_scaled + r.lqu_scaled - 0.5).abs() > 1e-10 {
                return Err(fail(format!("{context}: lcl + lqu = {}", r.lcl_scaled + r.lqu_scaled)));
            }
            if let Some(bound) = r.error_bound {
                let limit = xy_chain::lambdas_small_beta(&XyParams::thermodynamic(r.sweep_var, 1.0, 0.0, 1.0, 0.0)?)?;
                let err = (r.lqu_scaled - limit.lqu).abs().max((r.lcl_scaled - limit.lcl).abs());
                if err > bound {
                    return Err(fail(format!("{context}: error {err:e} exceeds bound {bound:e}")));
                }
            }
            verified += 1;
        }
    }
    Ok(Artifacts { table: xy_table(&rows), report: None, verified_rows: verified })
}

fn tpm_quench(p: &TpmRunParams) -> Result<QuenchSpec> {
    match p.model {
        TpmModel::LandauZener => Ok(landau_zener::quench(&LzParams::new(p.delta, p.b, p.g0)?, p.dg)?),
        TpmModel::Operators => {
            let (Some(h0), Some(h1)) = (&p.h0, &p.h1) else {
                return Err(CliError::config("model = \"operators\" needs h0 and h1 operator files"));
            };
            Ok(QuenchSpec::linear(load_operator_file(h0)?, load_operator_file(h1)?, p.g0, p.dg)?)
        }
    }
}

fn trajectory_table(ens: &PathEnsemble) -> CsvTable {
    let mut table = CsvTable::new(&["i", "j", "prob_or_count", "w", "sigma", "lcl", "lqu"]);
    for (k, r) in ens.records.iter().enumerate() {
        let weight = match &ens.counts {
            Some(c) => Cell::from(c[k]),
            None => Cell::from(r.prob),
        };
        table.push(vec![
            r.i.into(),
            r.j.into(),
            weight,
            r.work.into(),
            r.sigma.into(),
            r.lambda_cl.into(),
            r.lambda_qu.into(),
        ]);
    }
    table
}

/// Enumerates or samples TPM trajectories; the report holds the fluctuation
/// theorems, the exact budget and the post-selected `Λ_cl`.
pub fn tpm_run(p: &TpmRunParams, seed: u64, verify: bool) -> Result<Artifacts> {
    check_betas(&[p.beta])?;
    let q = tpm_quench(p)?;
    let exact = tpm::enumerate_paths(&q, p.beta)?;
    let ens = if p.samples == 0 { exact.clone() } else { tpm::sample_trajectories(&q, p.beta, p.samples, seed)? };
    let report = tpm::fluctuation_report(&ens);
    let budget = quench::budget(&q, p.beta)?;
    let post = tpm::postselect_lambda_cl(&ens, &q)?;
    let lqu = tpm::sigma_from_lcl(budget.sigma, post.estimate);

    let mut text = report.to_text();
    for (k, v) in [
        ("budget_sigma", budget.sigma),
        ("budget_lambda_cl", budget.lambda_cl),
        ("budget_lambda_qu", budget.lambda_qu),
        ("postselected_lambda_cl", post.estimate.value),
        ("se_postselected_lambda_cl", post.estimate.std_error),
        ("postselected_relative_gap", post.relative_gap),
        ("lambda_qu_from_sigma", lqu.value),
        ("se_lambda_qu_from_sigma", lqu.std_error),
    ] {
        text.push_str(&format!("{k} = {v:.16e}\n"));
    }
    text.push_str(&format!("seed = {seed}\n"));

    let mut verified = 0;
    if verify {
        check_budget(&budget, "tpm budget")?;
        let reference = tpm::fluctuation_report(&exact);
        if ens.is_sampled() {
            let dev = report.deviations_from(&reference, 4.0);
            if !dev.is_empty() {
                return Err(fail(format!("sampled report outside 4 standard errors: {}", dev.join("; "))));
            }
        } else {
            for (name, gap) in [
                ("ift_sigma", reference.ift_sigma - 1.0),
                ("jarzynski", reference.jarzynski_gap),
                ("ift_lcl", reference.ift_lcl - 1.0),
                ("mean_sigma", reference.mean_sigma - budget.sigma),
            ] {
                if gap.abs() > 1e-12 {
                    return Err(fail(format!("{name} off by {gap:e}")));
                }
            }
        }
        verified = 1;
    }
    Ok(Artifacts { table: trajectory_table(&ens), report: Some(text), verified_rows: verified })
}

pub const BUDGET_HEADER: [&str; 9] = [
    "beta",
    "sigma",
    "lambda_cl",
    "lambda_qu",
    "remainder",
    "avg_work",
    "delta_f",
    "alt_population",
    "alt_coherence",
];

/// Full budget of `H₀ + g₀H₁ → H₀ + (g₀ + δg)H₁` for each β.
pub fn generic_quench(p: &GenericQuenchParams, verify: Option<u64>) -> Result<Artifacts> {
    check_betas(&p.betas)?;
    let q = QuenchSpec::linear(load_operator_file(&p.h0)?, load_operator_file(&p.h1)?, p.g0, p.dg)?;
    let budgets: Vec<EntropyBudget> = p.betas.par_iter().map(|&b| quench::budget(&q, b)).collect::<Result<_, _>>()?;
    let mut table = CsvTable::new(&BUDGET_HEADER);
    for b in &budgets {
        table.push(vec![
            b.beta.into(),
            b.sigma.into(),
            b.lambda_cl.into(),
            b.lambda_qu.into(),
            b.expansion_remainder().into(),
            b.avg_work.into(),
            b.delta_f.into(),
            b.alt_population.into(),
            b.alt_coherence.into(),
        ]);
    }
    let mut verified = 0;
    if let Some(seed) = verify {
        for i in spot_check_indices(budgets.len(), seed) {
            check_budget(&budgets[i], &format!("budget row {i}"))?;
            verified += 1;
        }
    }
    Ok(Artifacts { table, report: None, verified_rows: verified })
}
