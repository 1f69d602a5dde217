//! Two-point energy measurements around a sudden quench.
//!
//! A trajectory `(i, j)` measures level `i` of `H₀`, quenches, then measures
//! level `j` of `H_τ`. It occurs with probability `P_F[i,j] = p_i⁰ |⟨j|i⟩|²`
//! and carries
//!
//! * `w = ε_j^τ - ε_i⁰`,
//! * `λ_cl = β(ε̃_i - ε_i⁰) - βΔF̃_{τ,0}` with `ε̃_i = ε_i⁰ + ΔH_ii`,
//! * `λ_qu = β(ε_j^τ - ε̃_i) - βΔF̃_{τ,τ}`,
//! * `σ = λ_cl + λ_qu = β(w - ΔF)`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{spectral_decompose, thermal_state, to_basis, SpectralDecomposition};
use crate::quench::{self, QuenchSpec};

/// Samples drawn from one RNG stream.
const CHUNK: u64 = 4096;

/// Energy gaps below this are flagged in the perturbative expansion.
pub const SMALL_DENOMINATOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    /// Level of `H₀`.
    pub i: usize,
    /// Level of `H_τ`.
    pub j: usize,
    /// `P_F[i,j]`, or the empirical frequency for sampled ensembles.
    pub prob: f64,
    pub work: f64,
    pub sigma: f64,
    pub lambda_cl: f64,
    pub lambda_qu: f64,
}

/// Trajectories of one quench, from enumeration or sampling.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub beta: f64,
    pub records: Vec<TrajectoryRecord>,
    /// `βΔF_{τ,0} = ln Z₀ - ln Z_τ`.
    pub beta_delta_f: f64,
    /// `βΔF̃_{τ,0} = ln Z₀ - ln Z̃_τ`.
    pub beta_delta_f_tilde: f64,
    /// Occurrences of each record when sampled, parallel to `records`.
    pub counts: Option<Vec<u64>>,
}

impl PathEnsemble {
    pub fn is_sampled(&self) -> bool {
        self.counts.is_some()
    }

    pub fn n_samples(&self) -> Option<u64> {
        self.counts.as_ref().map(|c| c.iter().sum())
    }

    pub fn total_probability(&self) -> f64 {
        self.records.iter().map(|r| r.prob).sum()
    }

    /// `Σ_j P_F[i,j]` for every initial level.
    pub fn initial_marginals(&self) -> Vec<f64> {
        let d = self.records.iter().map(|r| r.i + 1).max().unwrap_or(0);
        let mut m = vec![0.0; d];
        for r in &self.records {
            m[r.i] += r.prob;
        }
        m
    }

    /// Probability-weighted mean of `f` over the records.
    pub fn mean(&self, f: impl Fn(&TrajectoryRecord) -> f64) -> f64 {
        self.records.iter().map(|r| r.prob * f(r)).sum()
    }
}

/// Everything needed to evaluate trajectories of a nondegenerate `H₀`.
struct Model {
    beta: f64,
    e0: Vec<f64>,
    e_tilde: Vec<f64>,
    e_tau: Vec<f64>,
    p0: Vec<f64>,
    /// `|⟨j|i⟩|²` summed over the columns of final level `j`.
    transition: Vec<Vec<f64>>,
    ln_z0: f64,
    ln_z_tilde: f64,
    ln_z_tau: f64,
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn require_nondegenerate(spec0: &SpectralDecomposition) -> Result<()> {
    if !spec0.is_nondegenerate() {
        return Err(Error::Unsupported(format!(
            "initial Hamiltonian has {} levels for dimension {}; trajectories need a nondegenerate spectrum",
            spec0.num_levels(),
            spec0.dim()
        )));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::validation(format!("beta must be finite and non-negative, got {beta}")));
    }
    Ok(())
}

impl Model {
    fn new(q: &QuenchSpec, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let spec0 = spectral_decompose(&q.initial_hamiltonian(), q.degeneracy_tol())?;
        require_nondegenerate(&spec0)?;
        let spec_tau = spectral_decompose(&q.final_hamiltonian(), q.degeneracy_tol())?;
        let rho0 = thermal_state(&spec0, beta)?;
        let ln_z0 = rho0.log_partition().expect("thermal state");
        let ln_z_tau = thermal_state(&spec_tau, beta)?.log_partition().expect("thermal state");

        let e0 = spec0.column_energies();
        let d = e0.len();
        let dh = to_basis(q.delta_h().matrix(), spec0.basis());
        let e_tilde: Vec<f64> = (0..d).map(|i| e0[i] + dh[(i, i)].re).collect();
        let ln_z_tilde = log_sum_exp(e_tilde.iter().map(|e| -beta * e));

        let overlap = spec0.basis().adjoint() * spec_tau.basis();
        let transition = (0..d)
            .map(|i| {
                spec_tau
                    .levels()
                    .iter()
                    .map(|l| l.columns().map(|c| overlap[(i, c)].norm_sqr()).sum())
                    .collect()
            })
            .collect();
        Ok(Self {
            beta,
            e0,
            e_tilde,
            e_tau: spec_tau.levels().iter().map(|l| l.energy).collect(),
            p0: rho0.populations().to_vec(),
            transition,
            ln_z0,
            ln_z_tilde,
            ln_z_tau,
        })
    }

    fn record(&self, i: usize, j: usize, prob: f64) -> TrajectoryRecord {
        let b = self.beta;
        let lambda_cl = b * (self.e_tilde[i] - self.e0[i]) - (self.ln_z0 - self.ln_z_tilde);
        let lambda_qu = b * (self.e_tau[j] - self.e_tilde[i]) - (self.ln_z_tilde - self.ln_z_tau);
        TrajectoryRecord {
            i,
            j,
            prob,
            work: self.e_tau[j] - self.e0[i],
            sigma: lambda_cl + lambda_qu,
            lambda_cl,
            lambda_qu,
        }
    }

    fn ensemble(&self, records: Vec<TrajectoryRecord>, counts: Option<Vec<u64>>) -> PathEnsemble {
        PathEnsemble {
            beta: self.beta,
            records,
            beta_delta_f: self.ln_z0 - self.ln_z_tau,
            beta_delta_f_tilde: self.ln_z0 - self.ln_z_tilde,
            counts,
        }
    }
}

/// Diagonal records only, all quantities zero.
fn trivial_ensemble(q: &QuenchSpec, beta: f64) -> Result<PathEnsemble> {
    check_beta(beta)?;
    let spec0 = spectral_decompose(&q.initial_hamiltonian(), q.degeneracy_tol())?;
    require_nondegenerate(&spec0)?;
    let rho0 = thermal_state(&spec0, beta)?;
    let records = rho0
        .populations()
        .iter()
        .enumerate()
        .map(|(i, &p)| TrajectoryRecord { i, j: i, prob: p, work: 0.0, sigma: 0.0, lambda_cl: 0.0, lambda_qu: 0.0 })
        .collect();
    Ok(PathEnsemble { beta, records, beta_delta_f: 0.0, beta_delta_f_tilde: 0.0, counts: None })
}

/// Every `(i, j)` pair with its exact probability.
pub fn enumerate_paths(q: &QuenchSpec, beta: f64) -> Result<PathEnsemble> {
    if q.is_trivial() {
        return trivial_ensemble(q, beta);
    }
    let m = Model::new(q, beta)?;
    let mut records = Vec::with_capacity(m.p0.len() * m.e_tau.len());
    for (i, row) in m.transition.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            records.push(m.record(i, j, m.p0[i] * t));
        }
    }
    Ok(m.ensemble(records, None))
}

/// Draws `n` trajectories. Sample `s` comes from ChaCha8 stream `s / 4096`
/// seeded with `seed`, so the result does not depend on the thread count.
/// Records are the observed cells in `(i, j)` order with empirical
/// frequencies as `prob`.
pub fn sample_trajectories(q: &QuenchSpec, beta: f64, n: u64, seed: u64) -> Result<PathEnsemble> {
    if n == 0 {
        return Err(Error::validation("number of samples must be at least 1"));
    }
    if q.is_trivial() {
        let exact = trivial_ensemble(q, beta)?;
        let dists = WeightedIndex::new(exact.records.iter().map(|r| r.prob))
            .map_err(|e| Error::numeric(format!("initial populations: {e}")))?;
        let counts = draw_counts(n, seed, exact.records.len(), |rng| dists.sample(rng));
        return Ok(from_counts(exact, &counts, n, |i| i));
    }
    let m = Model::new(q, beta)?;
    let levels_tau = m.e_tau.len();
    let initial = WeightedIndex::new(&m.p0).map_err(|e| Error::numeric(format!("initial populations: {e}")))?;
    let rows: Vec<WeightedIndex<f64>> = m
        .transition
        .iter()
        .map(|row| WeightedIndex::new(row).map_err(|e| Error::numeric(format!("transition row: {e}"))))
        .collect::<Result<_>>()?;
    let counts = draw_counts(n, seed, m.p0.len() * levels_tau, |rng| {
        let i = initial.sample(rng);
        i * levels_tau + rows[i].sample(rng)
    });
    let full: Vec<TrajectoryRecord> =
        (0..m.p0.len()).flat_map(|i| (0..levels_tau).map(move |j| (i, j))).map(|(i, j)| m.record(i, j, 0.0)).collect();
    Ok(from_counts(m.ensemble(full, None), &counts, n, |c| c))
}

fn draw_counts<F>(n: u64, seed: u64, cells: usize, draw: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(n - c * CHUNK);
            let mut counts = vec![0u64; cells];
            for _ in 0..len {
                counts[draw(&mut rng)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

fn from_counts(mut ens: PathEnsemble, counts: &[u64], n: u64, cell_of: impl Fn(usize) -> usize) -> PathEnsemble {
    let mut records = Vec::new();
    let mut kept = Vec::new();
    for (idx, r) in ens.records.iter().enumerate() {
        let c = counts[cell_of(idx)];
        if c > 0 {
            records.push(TrajectoryRecord { prob: c as f64 / n as f64, ..*r });
            kept.push(c);
        }
    }
    ens.records = records;
    ens.counts = Some(kept);
    ens
}

/// Standard errors of the sampled entries of an [`FTReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtStdErrors {
    pub ift_sigma: f64,
    pub jarzynski: f64,
    pub ift_lcl: f64,
    pub ift_lqu: f64,
    pub mean_sigma: f64,
    pub mean_lcl: f64,
    pub mean_lqu: f64,
    pub mean_work: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTReport {
    /// `⟨e^{-σ}⟩`.
    pub ift_sigma: f64,
    /// `⟨e^{-βw}⟩ e^{βΔF} - 1`.
    pub jarzynski_gap: f64,
    pub ift_lcl: f64,
    pub ift_lqu: f64,
    pub mean_sigma: f64,
    pub mean_lcl: f64,
    pub mean_lqu: f64,
    pub mean_work: f64,
    /// `None` for exact enumeration.
    pub n_samples: Option<u64>,
    pub std_errors: Option<FtStdErrors>,
}

impl FTReport {
    fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("ift_sigma", self.ift_sigma),
            ("jarzynski_gap", self.jarzynski_gap),
            ("ift_lcl", self.ift_lcl),
            ("ift_lqu", self.ift_lqu),
            ("mean_sigma", self.mean_sigma),
            ("mean_lcl", self.mean_lcl),
            ("mean_lqu", self.mean_lqu),
            ("mean_work", self.mean_work),
        ]
    }

    /// Entries of this sampled report that lie more than `k` standard errors
    /// from `exact`.
    pub fn deviations_from(&self, exact: &FTReport, k: f64) -> Vec<String> {
        let Some(se) = self.std_errors else {
            return vec!["report has no standard errors".into()];
        };
        let ses = [
            se.ift_sigma,
            se.jarzynski,
            se.ift_lcl,
            se.ift_lqu,
            se.mean_sigma,
            se.mean_lcl,
            se.mean_lqu,
            se.mean_work,
        ];
        self.entries()
            .iter()
            .zip(exact.entries())
            .zip(ses)
            .filter_map(|(((name, v), (_, x)), s)| {
                let d = (v - x).abs();
                (d > k * s + 1e-12 * (1.0 + x.abs())).then(|| format!("{name}: {v:e} vs {x:e} (SE {s:e})"))
            })
            .collect()
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            out.push_str(&format!("{k} = {v:.16e}\n"));
        }
        match self.n_samples {
            Some(n) => out.push_str(&format!("n_samples = {n}\n")),
            None => out.push_str("n_samples = exact\n"),
        }
        if let Some(se) = self.std_errors {
            for (k, v) in [
                ("se_ift_sigma", se.ift_sigma),
                ("se_jarzynski", se.jarzynski),
                ("se_ift_lcl", se.ift_lcl),
                ("se_ift_lqu", se.ift_lqu),
                ("se_mean_sigma", se.mean_sigma),
                ("se_mean_lcl", se.mean_lcl),
                ("se_mean_lqu", se.mean_lqu),
                ("se_mean_work", se.mean_work),
            ] {
                out.push_str(&format!("{k} = {v:.16e}\n"));
            }
        }
        out
    }
}

/// Weighted mean and, for sampled ensembles, its standard error.
fn moment(ens: &PathEnsemble, f: impl Fn(&TrajectoryRecord) -> f64) -> (f64, f64) {
    let mean = ens.mean(&f);
    let se = match &ens.counts {
        Some(c) => {
            let n: u64 = c.iter().sum();
            if n < 2 {
                f64::INFINITY
            } else {
                let ss: f64 = ens.records.iter().zip(c).map(|(r, &k)| k as f64 * (f(r) - mean).powi(2)).sum();
                (ss / (n - 1) as f64 / n as f64).sqrt()
            }
        }
        None => 0.0,
    };
    (mean, se)
}

/// Integral fluctuation theorems and means over an ensemble.
pub fn fluctuation_report(ens: &PathEnsemble) -> FTReport {
    // Exponential averages are accumulated as exp(ln P - x) so that tiny
    // probabilities never multiply huge exponentials.
    let exp_avg = |x: fn(&TrajectoryRecord, f64) -> f64| {
        let bf = ens.beta_delta_f;
        let mean: f64 =
            ens.records.iter().filter(|r| r.prob > 0.0).map(|r| (r.prob.ln() - x(r, bf)).exp()).sum();
        let (_, se) = moment(ens, |r| (-x(r, bf)).exp());
        (mean, se)
    };
    let (ift_sigma, se_sigma) = exp_avg(|r, _| r.sigma);
    let beta = ens.beta;
    let (jz, se_jz) = {
        let bf = ens.beta_delta_f;
        let mean: f64 = ens
            .records
            .iter()
            .filter(|r| r.prob > 0.0)
            .map(|r| (r.prob.ln() - beta * r.work + bf).exp())
            .sum();
        let (_, se) = moment(ens, |r| (-beta * r.work + bf).exp());
        (mean, se)
    };
    let (ift_lcl, se_lcl) = exp_avg(|r, _| r.lambda_cl);
    let (ift_lqu, se_lqu) = exp_avg(|r, _| r.lambda_qu);
    let (mean_sigma, se_ms) = moment(ens, |r| r.sigma);
    let (mean_lcl, se_ml) = moment(ens, |r| r.lambda_cl);
    let (mean_lqu, se_mq) = moment(ens, |r| r.lambda_qu);
    let (mean_work, se_mw) = moment(ens, |r| r.work);
    FTReport {
        ift_sigma,
        jarzynski_gap: jz - 1.0,
        ift_lcl,
        ift_lqu,
        mean_sigma,
        mean_lcl,
        mean_lqu,
        mean_work,
        n_samples: ens.n_samples(),
        std_errors: ens.counts.as_ref().map(|_| FtStdErrors {
            ift_sigma: se_sigma,
            jarzynski: se_jz,
            ift_lcl: se_lcl,
            ift_lqu: se_lqu,
            mean_sigma: se_ms,
            mean_lcl: se_ml,
            mean_lqu: se_mq,
            mean_work: se_mw,
        }),
    }
}

/// Second-order estimate of one final energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedLevel {
    pub initial: f64,
    pub first_order: f64,
    pub second_order: f64,
    /// `ε_j⁰ + ΔH_jj + Σ_{ℓ≠j} |ΔH_jℓ|²/(ε_j⁰ - ε_ℓ⁰)`.
    pub estimate: f64,
    pub exact: f64,
    /// `|estimate - exact|`.
    pub gap: f64,
    /// Some `|ε_j⁰ - ε_ℓ⁰|` fell below [`SMALL_DENOMINATOR`].
    pub small_denominator: bool,
    /// `|second order| > |first order|`: the expansion is not controlled.
    pub correction_dominant: bool,
}

/// Rayleigh–Schrödinger estimates of the final energies, ordered as the
/// initial levels.
pub fn perturbative_final_energies(q: &QuenchSpec) -> Result<Vec<PerturbedLevel>> {
    let spec0 = spectral_decompose(&q.initial_hamiltonian(), q.degeneracy_tol())?;
    require_nondegenerate(&spec0)?;
    let spec_tau = spectral_decompose(&q.final_hamiltonian(), 1e-15)?;
    let exact = spec_tau.column_energies();
    let e0 = spec0.column_energies();
    let dh = to_basis(q.delta_h().matrix(), spec0.basis());
    let d = e0.len();
    Ok((0..d)
        .map(|j| {
            let first = dh[(j, j)].re;
            let mut second = 0.0;
            let mut small = false;
            for l in (0..d).filter(|&l| l != j) {
                let den = e0[j] - e0[l];
                if den.abs() < SMALL_DENOMINATOR {
                    small = true;
                }
                second += dh[(j, l)].norm_sqr() / den;
            }
            let estimate = e0[j] + first + second;
            PerturbedLevel {
                initial: e0[j],
                first_order: first,
                second_order: second,
                estimate,
                exact: exact[j],
                gap: (estimate - exact[j]).abs(),
                small_denominator: small,
                correction_dominant: second.abs() > first.abs(),
            }
        })
        .collect())
}

/// A value with its standard error (zero for exact inputs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelection {
    /// `β⟨w^d⟩ + ln⟨e^{-βw^d}⟩` over the `i = j` trajectories.
    pub estimate: Estimate,
    /// `Λ_cl` from the generic budget.
    pub reference: f64,
    /// `|estimate - reference| / reference`.
    pub relative_gap: f64,
}

/// Estimates `Λ_cl` from the trajectories that stay in the same level.
///
/// Level `i` of the diagonal sub-ensemble is weighted by its initial
/// population `p_i⁰` (the `j`-marginal of the ensemble), renormalized over
/// the levels whose diagonal trajectory is present.
pub fn postselect_lambda_cl(ens: &PathEnsemble, q: &QuenchSpec) -> Result<PostSelection> {
    let beta = ens.beta;
    let marginals = ens.initial_marginals();
    let diag: Vec<(f64, f64)> =
        ens.records.iter().filter(|r| r.i == r.j).map(|r| (marginals[r.i], r.work)).collect();
    let norm: f64 = diag.iter().map(|(p, _)| p).sum();
    if diag.is_empty() || !(norm > 0.0) {
        return Err(Error::Consistency("ensemble has no diagonal trajectories".into()));
    }
    let mean_w: f64 = diag.iter().map(|(p, w)| p * w).sum::<f64>() / norm;
    // ln⟨e^{-βw}⟩ relative to the mean keeps the exponent small.
    let e: f64 = diag.iter().map(|(p, w)| p * (-beta * (w - mean_w)).exp()).sum::<f64>() / norm;
    let value = e.ln();

    let std_error = match ens.n_samples() {
        Some(n) => {
            let n_diag = n as f64 * norm;
            let phi = |w: f64| beta * w + (-beta * (w - mean_w)).exp() / e;
            let phi_mean: f64 = diag.iter().map(|(p, w)| p * phi(*w)).sum::<f64>() / norm;
            let var: f64 = diag.iter().map(|(p, w)| p * (phi(*w) - phi_mean).powi(2)).sum::<f64>() / norm;
            (var / n_diag).sqrt()
        }
        None => 0.0,
    };
    let reference = quench::lambda_classical(q, beta)?;
    let gap = (value - reference).abs();
    Ok(PostSelection {
        estimate: Estimate { value, std_error },
        reference,
        relative_gap: if reference > 0.0 { gap / reference } else { gap },
    })
}

/// `Λ_qu = Σ - Λ_cl`, carrying the uncertainty of the `Λ_cl` estimate.
pub fn sigma_from_lcl(sigma_exact: f64, lcl: Estimate) -> Estimate {
    Estimate { value: sigma_exact - lcl.value, std_error: lcl.std_error }
}
