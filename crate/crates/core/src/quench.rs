//! Entropy-production budget of a sudden quench `H₀ → H₀ + ΔH` starting from
//! the Gibbs state of `H₀`.

use log::warn;

use crate::error::{Error, Result};
use crate::operator::{
    dephase, relative_entropy, skew_information_y_integral, spectral_decompose, split_perturbation,
    thermal_state, variance, DensityOperator, HermitianOperator, SpectralDecomposition,
    DEFAULT_DEGENERACY_TOL,
};

/// Relative agreement required between the two routes to `Σ`.
pub const SIGMA_ROUTE_RTOL: f64 = 1e-9;

/// How the Hamiltonian changes.
#[derive(Debug, Clone)]
pub enum Drive {
    /// `H(g) = H₀ + g H₁`, quenched from `g0` to `g0 + dg`.
    Linear { h1: HermitianOperator, g0: f64, dg: f64 },
    /// Explicit perturbation applied to `H₀`.
    Direct { delta_h: HermitianOperator },
}

#[derive(Debug, Clone)]
pub struct QuenchSpec {
    h0: HermitianOperator,
    drive: Drive,
    degeneracy_tol: f64,
}

impl QuenchSpec {
    pub fn linear(h0: HermitianOperator, h1: HermitianOperator, g0: f64, dg: f64) -> Result<Self> {
        h0.check_dim(h1.dim())?;
        if !g0.is_finite() || !dg.is_finite() {
            return Err(Error::validation("g0 and dg must be finite"));
        }
        Ok(Self { h0, drive: Drive::Linear { h1, g0, dg }, degeneracy_tol: DEFAULT_DEGENERACY_TOL })
    }

    pub fn direct(h0: HermitianOperator, delta_h: HermitianOperator) -> Result<Self> {
        h0.check_dim(delta_h.dim())?;
        Ok(Self { h0, drive: Drive::Direct { delta_h }, degeneracy_tol: DEFAULT_DEGENERACY_TOL })
    }

    pub fn with_degeneracy_tol(mut self, tol: f64) -> Self {
        self.degeneracy_tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    /// Pre-quench Hamiltonian (`H₀ + g₀H₁` for a linear drive).
    pub fn initial_hamiltonian(&self) -> HermitianOperator {
        match &self.drive {
            Drive::Linear { h1, g0, .. } => self.h0.add_scaled(h1, *g0).expect("dimensions checked"),
            Drive::Direct { .. } => self.h0.clone(),
        }
    }

    pub fn final_hamiltonian(&self) -> HermitianOperator {
        match &self.drive {
            Drive::Linear { h1, g0, dg } => self.h0.add_scaled(h1, g0 + dg).expect("dimensions checked"),
            Drive::Direct { delta_h } => self.h0.add(delta_h).expect("dimensions checked"),
        }
    }

    /// `ΔH = H_τ - H_0`; `dg·H₁` exactly for a linear drive.
    pub fn delta_h(&self) -> HermitianOperator {
        match &self.drive {
            Drive::Linear { h1, dg, .. } => h1.scale(*dg),
            Drive::Direct { delta_h } => delta_h.clone(),
        }
    }

    pub(crate) fn is_trivial(&self) -> bool {
        match &self.drive {
            Drive::Linear { dg, h1, .. } => *dg == 0.0 || h1.max_abs_entry() == 0.0,
            Drive::Direct { delta_h } => delta_h.max_abs_entry() == 0.0,
        }
    }

    /// `|δg|·‖H₁‖` (or `‖ΔH‖`) in operator norm.
    pub fn drive_strength(&self) -> f64 {
        match &self.drive {
            Drive::Linear { h1, dg, .. } => dg.abs() * h1.op_norm(),
            Drive::Direct { delta_h } => delta_h.op_norm(),
        }
    }

    fn check_expansion_validity(&self, beta: f64) {
        let x = beta * self.drive_strength();
        if x > 1.0 {
            warn!("β·|ΔH| = {x:.3} > 1: the second-order split Λ_cl + Λ_qu may not approximate Σ");
        }
    }
}

/// All entropy-production quantities of one quench, in nats (`β` in inverse
/// energy units of `H`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBudget {
    pub beta: f64,
    pub sigma: f64,
    pub lambda_cl: f64,
    pub lambda_qu: f64,
    pub avg_work: f64,
    pub delta_f: f64,
    pub alt_population: f64,
    pub alt_coherence: f64,
}

impl EntropyBudget {
    pub fn zero(beta: f64) -> Self {
        Self {
            beta,
            sigma: 0.0,
            lambda_cl: 0.0,
            lambda_qu: 0.0,
            avg_work: 0.0,
            delta_f: 0.0,
            alt_population: 0.0,
            alt_coherence: 0.0,
        }
    }

    /// `Λ_cl + Λ_qu - Σ`, the remainder of the second-order expansion.
    pub fn expansion_remainder(&self) -> f64 {
        self.lambda_cl + self.lambda_qu - self.sigma
    }

    /// Checks the exact identities every budget must satisfy. Returns the
    /// list of violated relations.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for (name, v) in [("sigma", self.sigma), ("lambda_cl", self.lambda_cl), ("lambda_qu", self.lambda_qu)] {
            if !(v >= -1e-12) {
                bad.push(format!("{name} = {v:e} is negative"));
            }
        }
        let alt = self.alt_population + self.alt_coherence;
        if (alt - self.sigma).abs() > 1e-10 {
            bad.push(format!("alt_population + alt_coherence = {alt:e} != sigma = {:e}", self.sigma));
        }
        let thermo = self.beta * (self.avg_work - self.delta_f);
        if (thermo - self.sigma).abs() > 1e-10 * (1.0 + self.sigma.abs()) {
            bad.push(format!("beta (W - dF) = {thermo:e} != sigma = {:e}", self.sigma));
        }
        bad
    }
}

/// `Σ` together with the work and free-energy terms of `Σ = β(⟨W⟩ - ΔF)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactEntropy {
    pub sigma: f64,
    pub avg_work: f64,
    pub delta_f: f64,
}

/// Leading small-β coefficients, `Λ/β²` as `β → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighTemperatureLimits {
    pub lcl_over_beta2: f64,
    pub lqu_over_beta2: f64,
    pub sigma_over_beta2: f64,
}

/// Objects shared by the individual budget terms.
struct Prepared {
    delta_h: HermitianOperator,
    spec0: SpectralDecomposition,
    spec_tau: SpectralDecomposition,
    rho0: DensityOperator,
    rho_tau: DensityOperator,
}

impl Prepared {
    fn new(q: &QuenchSpec, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let spec0 = spectral_decompose(&q.initial_hamiltonian(), q.degeneracy_tol)?;
        let spec_tau = spectral_decompose(&q.final_hamiltonian(), q.degeneracy_tol)?;
        let rho0 = thermal_state(&spec0, beta)?;
        let rho_tau = thermal_state(&spec_tau, beta)?;
        Ok(Self { delta_h: q.delta_h(), spec0, spec_tau, rho0, rho_tau })
    }

    fn exact(&self, beta: f64) -> Result<ExactEntropy> {
        let avg_work = self.rho0.expectation(&self.delta_h)?;
        if beta == 0.0 {
            // ΔF → ⟨ΔH⟩_{I/d} = ⟨W⟩ as β → 0.
            return Ok(ExactEntropy { sigma: 0.0, avg_work, delta_f: avg_work });
        }
        let ln_z0 = self.rho0.log_partition().expect("thermal state");
        let ln_zt = self.rho_tau.log_partition().expect("thermal state");
        let beta_delta_f = self.log_partition_ratio(beta).map_or(ln_z0 - ln_zt, |r| -r);
        let delta_f = beta_delta_f / beta;

        let by_relative_entropy = relative_entropy(&self.rho0, &self.rho_tau)?;
        let by_work = beta * avg_work - beta_delta_f;

        let floor = 1e-13 * (1.0 + (beta * avg_work).abs() + ln_z0.abs() + ln_zt.abs());
        let gap = (by_relative_entropy - by_work).abs();
        if gap > SIGMA_ROUTE_RTOL * by_relative_entropy.abs().max(by_work.abs()) + floor {
            return Err(Error::Consistency(format!(
                "S(rho0||rho_tau) = {by_relative_entropy:e} but beta(<W> - dF) = {by_work:e}"
            )));
        }
        Ok(ExactEntropy { sigma: by_work, avg_work, delta_f })
    }

    /// `ln(Z_τ/Z₀) = ln Σ_j p_j⁰ e^{-β(ε_j^τ - ε_j⁰)}` with both spectra
    /// sorted, so that only the small level shifts enter. `None` when the
    /// shifts are too large for the expansion to help.
    fn log_partition_ratio(&self, beta: f64) -> Option<f64> {
        let mut initial: Vec<(f64, f64)> =
            self.spec0.column_energies().into_iter().zip(self.rho0.populations().iter().copied()).collect();
        initial.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut fin = self.spec_tau.column_energies();
        fin.sort_by(f64::total_cmp);
        let mut sum = 0.0;
        for (&(e0, p), &et) in initial.iter().zip(&fin) {
            let x = -beta * (et - e0);
            if x.abs() > 1.0 {
                return None;
            }
            sum += p * x.exp_m1();
        }
        Some(sum.ln_1p())
    }

    fn lambdas(&self, beta: f64) -> Result<(f64, f64)> {
        if beta == 0.0 {
            return Ok((0.0, 0.0));
        }
        let (dh_d, dh_c) = split_perturbation(&self.delta_h, &self.spec0)?;
        let pre = 0.5 * beta * beta;
        let lcl = pre * variance(&self.rho0, &dh_d)?;
        let lqu = pre * (variance(&self.rho0, &dh_c)? - skew_information_y_integral(&self.rho0, &dh_c)?);
        Ok((lcl, lqu))
    }

    fn alternative(&self) -> Result<(f64, f64)> {
        let dephased = dephase(&self.rho0, &self.spec_tau)?;
        Ok((relative_entropy(&dephased, &self.rho_tau)?, relative_entropy(&self.rho0, &dephased)?))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::validation(format!("beta must be finite and non-negative, got {beta}")));
    }
    Ok(())
}

/// `Σ = S(ρ₀‖ρ_τ)`, cross-checked against `β(⟨W⟩ - ΔF)`.
pub fn entropy_production_exact(q: &QuenchSpec, beta: f64) -> Result<ExactEntropy> {
    check_beta(beta)?;
    if q.is_trivial() {
        return Ok(ExactEntropy { sigma: 0.0, avg_work: 0.0, delta_f: 0.0 });
    }
    Prepared::new(q, beta)?.exact(beta)
}

/// `Λ_cl = (β²/2) Var₀[ΔH^d]`.
pub fn lambda_classical(q: &QuenchSpec, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta == 0.0 || q.is_trivial() {
        return Ok(0.0);
    }
    q.check_expansion_validity(beta);
    Ok(Prepared::new(q, beta)?.lambdas(beta)?.0)
}

/// `Λ_qu = (β²/2)(Var₀[ΔH^c] - ∫₀¹ I^y(ρ₀, ΔH^c) dy)`.
pub fn lambda_quantum(q: &QuenchSpec, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta == 0.0 || q.is_trivial() {
        return Ok(0.0);
    }
    q.check_expansion_validity(beta);
    Ok(Prepared::new(q, beta)?.lambdas(beta)?.1)
}

/// `Σ = S(D(ρ₀)‖ρ_τ) + S(ρ₀‖D(ρ₀))` with `D` the dephasing in the final
/// energy basis. Returns `(population_term, coherence_term)`.
pub fn alternative_splitting(q: &QuenchSpec, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    if q.is_trivial() {
        return Ok((0.0, 0.0));
    }
    Prepared::new(q, beta)?.alternative()
}

/// `β → 0` coefficients of `Λ_cl`, `Λ_qu` and `Σ`.
///
/// `ΔH` is first made traceless. `sigma_over_beta2` is computed from `ΔH`
/// alone, so it is bit-for-bit independent of `H₀`.
pub fn high_temperature_limits(q: &QuenchSpec) -> Result<HighTemperatureLimits> {
    let d = q.dim() as f64;
    let delta_h = q.delta_h().traceless();
    let spec0 = spectral_decompose(&q.initial_hamiltonian(), q.degeneracy_tol)?;
    let (dh_d, dh_c) = split_perturbation(&delta_h, &spec0)?;
    Ok(HighTemperatureLimits {
        lcl_over_beta2: dh_d.hs_norm_sqr() / (2.0 * d),
        lqu_over_beta2: dh_c.hs_norm_sqr() / (2.0 * d),
        sigma_over_beta2: delta_h.hs_norm_sqr() / (2.0 * d),
    })
}

/// Every term of the budget from a single pair of diagonalizations.
pub fn budget(q: &QuenchSpec, beta: f64) -> Result<EntropyBudget> {
    check_beta(beta)?;
    if q.is_trivial() {
        return Ok(EntropyBudget::zero(beta));
    }
    q.check_expansion_validity(beta);
    let prep = Prepared::new(q, beta)?;
    let exact = prep.exact(beta)?;
    let (lambda_cl, lambda_qu) = prep.lambdas(beta)?;
    let (alt_population, alt_coherence) = prep.alternative()?;
    Ok(EntropyBudget {
        beta,
        sigma: exact.sigma,
        lambda_cl,
        lambda_qu,
        avg_work: exact.avg_work,
        delta_f: exact.delta_f,
        alt_population,
        alt_coherence,
    })
}
