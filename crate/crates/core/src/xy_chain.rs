//! Transverse-field XY chain with periodic boundaries,
//! `H = -Σ_j [(1+γ)/2 σ^x_j σ^x_{j+1} + (1-γ)/2 σ^y_j σ^y_{j+1} + g σ^z_j]`
//! with `J = 1`, in its free-fermion form `Σ_k ε_k (2η_k†η_k - 1)`.
//!
//! All per-site quantities are returned as `Λ/(Nβ²)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{spectral_decompose, HermitianOperator, Matrix, C64, DEFAULT_DEGENERACY_TOL};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions};
use crate::quench::{self, QuenchSpec};
use crate::special::{sech2, tanhc};

/// Below this `ε_k` a mode is treated as gapless.
pub const GAPLESS_EPS: f64 = 1e-14;

/// Absolute tolerance of the k-integrals.
pub const K_INTEGRAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainSize {
    Finite(usize),
    Thermodynamic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyParams {
    pub g: f64,
    pub gamma: f64,
    pub beta: f64,
    pub dg: f64,
    pub dgamma: f64,
    pub size: ChainSize,
}

impl XyParams {
    pub fn new(g: f64, gamma: f64, beta: f64, dg: f64, dgamma: f64, size: ChainSize) -> Result<Self> {
        for (name, v) in [("g", g), ("gamma", gamma), ("beta", beta), ("dg", dg), ("dgamma", dgamma)] {
            if !v.is_finite() {
                return Err(Error::validation(format!("{name} must be finite, got {v}")));
            }
        }
        if beta < 0.0 {
            return Err(Error::validation(format!("beta must be non-negative, got {beta}")));
        }
        if let ChainSize::Finite(n) = size {
            if n == 0 || n % 2 != 0 {
                return Err(Error::validation(format!("chain length must be even and positive, got {n}")));
            }
        }
        Ok(Self { g, gamma, beta, dg, dgamma, size })
    }

    pub fn thermodynamic(g: f64, gamma: f64, beta: f64, dg: f64, dgamma: f64) -> Result<Self> {
        Self::new(g, gamma, beta, dg, dgamma, ChainSize::Thermodynamic)
    }

    pub fn finite(g: f64, gamma: f64, beta: f64, dg: f64, dgamma: f64, n: usize) -> Result<Self> {
        Self::new(g, gamma, beta, dg, dgamma, ChainSize::Finite(n))
    }

    fn require_finite(&self) -> Result<usize> {
        match self.size {
            ChainSize::Finite(n) => Ok(n),
            ChainSize::Thermodynamic => Err(Error::validation("operation needs a finite chain length")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAngles {
    pub k: f64,
    pub eps_k: f64,
    pub cos_theta_k: f64,
    pub sin_theta_k: f64,
}

impl ModeAngles {
    /// `δγ sin k sinθ_k + δg cosθ_k`, the population-changing amplitude.
    pub fn diagonal_amplitude(&self, dg: f64, dgamma: f64) -> f64 {
        dgamma * self.k.sin() * self.sin_theta_k + dg * self.cos_theta_k
    }

    /// `δg sinθ_k - δγ sin k cosθ_k`, the coherence-generating amplitude.
    pub fn coherent_amplitude(&self, dg: f64, dgamma: f64) -> f64 {
        dg * self.sin_theta_k - dgamma * self.k.sin() * self.cos_theta_k
    }
}

fn angles_at(g: f64, gamma: f64, k: f64) -> Result<ModeAngles> {
    let a = g - k.cos();
    let c = gamma * k.sin();
    let eps_k = a.hypot(c);
    if eps_k < GAPLESS_EPS {
        return Err(Error::GaplessMode { k, eps: eps_k });
    }
    Ok(ModeAngles { k, eps_k, cos_theta_k: a / eps_k, sin_theta_k: c / eps_k })
}

/// Bogoliubov angle of mode `k ∈ (0, π)`.
pub fn mode_angles(p: &XyParams, k: f64) -> Result<ModeAngles> {
    check_k(k)?;
    angles_at(p.g, p.gamma, k)
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::validation(format!("mode momentum must lie in (0, pi), got {k}")));
    }
    Ok(())
}

/// `Λ_cl/(Nβ²)` and `Λ_qu/(Nβ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyLambdas {
    pub lcl: f64,
    pub lqu: f64,
}

impl XyLambdas {
    pub fn total(&self) -> f64 {
        self.lcl + self.lqu
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { lcl: self.lcl / factor, lqu: self.lqu / factor }
    }
}

/// Per-mode integrands `[sech²(βε) D², tanh(βε)/(βε) C²]`; `thermal = false`
/// replaces both thermal factors by one.
fn integrand(p: &XyParams, m: &ModeAngles, thermal: bool) -> [f64; 2] {
    let d = m.diagonal_amplitude(p.dg, p.dgamma);
    let c = m.coherent_amplitude(p.dg, p.dgamma);
    if thermal {
        let x = p.beta * m.eps_k;
        [sech2(x) * d * d, tanhc(x) * c * c]
    } else {
        [d * d, c * c]
    }
}

fn k_integral(p: &XyParams, thermal: bool) -> Result<XyLambdas> {
    let breaks: Vec<f64> = if p.g.abs() < 1.0 { vec![p.g.acos()] } else { Vec::new() };
    let opts = AdaptiveOptions { abs_tol: K_INTEGRAL_TOL, ..AdaptiveOptions::default() };
    let v = integrate_adaptive(
        |k| {
            let m = angles_at(p.g, p.gamma, k)?;
            Ok(integrand(p, &m, thermal).map(|x| x / (2.0 * PI)))
        },
        0.0,
        PI,
        &breaks,
        opts,
    )?;
    Ok(XyLambdas { lcl: v[0], lqu: v[1] })
}

/// Thermodynamic-limit `Λ/(Nβ²)` at inverse temperature `p.beta`.
pub fn lambdas_thermodynamic(p: &XyParams) -> Result<XyLambdas> {
    if p.size != ChainSize::Thermodynamic {
        return Err(Error::validation("lambdas_thermodynamic needs the thermodynamic-limit flag"));
    }
    k_integral(p, true)
}

/// `β → 0` limit of [`lambdas_thermodynamic`]; `p.beta` and `p.size` are ignored.
pub fn lambdas_small_beta(p: &XyParams) -> Result<XyLambdas> {
    k_integral(p, false)
}

/// Closed form of the small-β `Λ_qu/(Nβ²δg²)` for the Ising chain (`γ = 1`,
/// `δγ = 0`): `1/4` for `|g₀| ≤ 1` and `1/(4g₀²)` otherwise.
pub fn ising_plateau(g0: f64) -> f64 {
    if g0.abs() <= 1.0 {
        0.25
    } else {
        0.25 / (g0 * g0)
    }
}

/// Momenta `k = (2n+1)π/N`, `n = 0, …, N/2 - 1`.
pub fn positive_momenta(n: usize) -> Vec<f64> {
    (0..n / 2).map(|i| (2 * i + 1) as f64 * PI / n as f64).collect()
}

fn finite_sum(p: &XyParams, thermal: bool) -> Result<XyLambdas> {
    let n = p.require_finite()?;
    let mut acc = [0.0; 2];
    for k in positive_momenta(n) {
        let m = angles_at(p.g, p.gamma, k)?;
        let v = integrand(p, &m, thermal);
        acc[0] += v[0];
        acc[1] += v[1];
    }
    let w = 1.0 / n as f64;
    Ok(XyLambdas { lcl: acc[0] * w, lqu: acc[1] * w })
}

/// Finite-N, `β → 0` values: midpoint sums of the small-β integrands with
/// weight `Δk/2π = 1/N`. With `δg = 1`, `δγ = 0` these are the `δg²`-scaled
/// `(Σ cos²θ_k, Σ sin²θ_k)/N`.
pub fn ising_finite_n(p: &XyParams) -> Result<XyLambdas> {
    finite_sum(p, false)
}

/// Finite-N values at finite `β`, from the same mode sums with thermal factors.
pub fn finite_n_extended(p: &XyParams) -> Result<XyLambdas> {
    finite_sum(p, true)
}

/// `M(g₀)`, the bound on `|∂²_k sin²θ_k|` for the Ising chain.
pub fn curvature_bound(g0: f64) -> Result<f64> {
    if (g0 - 1.0).abs() < 1e-9 || (g0 + 1.0).abs() < 1e-9 {
        return Err(Error::domain(format!("curvature bound diverges at the critical field g0 = {g0}")));
    }
    Ok(if g0 < 0.0 { 2.0 / (g0 + 1.0).powi(2) } else { 2.0 / (g0 - 1.0).powi(2) })
}

/// `Mπ³/(6N²)`, bounding `|finite-N − integral|` for the Ising chain.
pub fn riemann_error_bound(g0: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::validation("chain length must be positive"));
    }
    let m = curvature_bound(g0)?;
    Ok(m * PI.powi(3) / (6.0 * (n as f64).powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureCheck {
    pub max_abs_second_derivative: f64,
    pub argmax_k: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Scans `|∂²_k sin²θ_k|` (γ = 1) on `[0, π]` and compares its maximum with
/// [`curvature_bound`].
pub fn check_curvature_bound(g0: f64, points: usize) -> Result<CurvatureCheck> {
    let bound = curvature_bound(g0)?;
    if points < 3 {
        return Err(Error::validation("curvature scan needs at least 3 points"));
    }
    let f = |k: f64| {
        let s = k.sin();
        s * s / (1.0 + g0 * g0 - 2.0 * g0 * k.cos())
    };
    let h = 1e-4;
    let mut best = (0.0, 0.0);
    for i in 0..points {
        let k = PI * i as f64 / (points - 1) as f64;
        let d2 = ((f(k + h) - 2.0 * f(k) + f(k - h)) / (h * h)).abs();
        if d2 > best.0 {
            best = (d2, k);
        }
    }
    Ok(CurvatureCheck {
        max_abs_second_derivative: best.0,
        argmax_k: best.1,
        bound,
        holds: best.0 <= bound * (1.0 + 1e-6),
    })
}

/// The `(k, -k)` pair block in the basis `{|00⟩, |11⟩, |01⟩, |10⟩}` and its
/// quench `δg ∂_g H + δγ ∂_γ H`.
pub fn pair_mode_hamiltonian(p: &XyParams, k: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    check_k(k)?;
    let m = angles_at(p.g, p.gamma, k)?;
    let a = p.g - k.cos();
    let c = p.gamma * k.sin();
    let h = block4(-2.0 * a, 2.0 * c);
    let dh = block4(-2.0 * p.dg, 2.0 * p.dgamma * k.sin());

    let spec = spectral_decompose(&h, DEFAULT_DEGENERACY_TOL)?;
    let mut energies = spec.column_energies();
    energies.sort_by(f64::total_cmp);
    let expect = [-2.0 * m.eps_k, 0.0, 0.0, 2.0 * m.eps_k];
    let scale = 1.0 + m.eps_k;
    if energies.iter().zip(expect).any(|(e, x)| (e - x).abs() > 1e-12 * scale) {
        return Err(Error::Consistency(format!("pair spectrum {energies:?} differs from {expect:?}")));
    }
    Ok((h, dh))
}

fn block4(diag: f64, off: f64) -> HermitianOperator {
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    let m = Matrix::from_row_slice(4, 4, &[
        r(diag), r(off), z, z,
        r(off), r(-diag), z, z,
        z, z, z, z,
        z, z, z, z,
    ]);
    HermitianOperator::new(m).expect("real symmetric")
}

/// `Λ/(Nβ²)` and `Σ/(Nβ²)` from generic budgets of every `(k, -k)` pair on
/// the finite-N grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpaceSums {
    pub lcl: f64,
    pub lqu: f64,
    pub sigma: f64,
}

pub fn pair_space_finite_n(p: &XyParams) -> Result<PairSpaceSums> {
    let n = p.require_finite()?;
    if !(p.beta > 0.0) {
        return Err(Error::validation("pair-space sums need beta > 0"));
    }
    let mut acc = PairSpaceSums { lcl: 0.0, lqu: 0.0, sigma: 0.0 };
    for k in positive_momenta(n) {
        let (h, dh) = pair_mode_hamiltonian(p, k)?;
        let b = quench::budget(&QuenchSpec::direct(h, dh)?, p.beta)?;
        acc.lcl += b.lambda_cl;
        acc.lqu += b.lambda_qu;
        acc.sigma += b.sigma;
    }
    let w = 1.0 / (n as f64 * p.beta * p.beta);
    Ok(PairSpaceSums { lcl: acc.lcl * w, lqu: acc.lqu * w, sigma: acc.sigma * w })
}

/// How a sweep point is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XyEvaluation {
    Thermodynamic,
    SmallBeta,
    FiniteN(usize),
    Extended(usize),
}

impl XyEvaluation {
    pub fn label(&self) -> &'static str {
        match self {
            XyEvaluation::Thermodynamic => "thermodynamic",
            XyEvaluation::SmallBeta => "small_beta",
            XyEvaluation::FiniteN(_) => "finite_n",
            XyEvaluation::Extended(_) => "extended",
        }
    }

    fn size(&self) -> ChainSize {
        match *self {
            XyEvaluation::FiniteN(n) | XyEvaluation::Extended(n) => ChainSize::Finite(n),
            _ => ChainSize::Thermodynamic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepAxis {
    /// Sweep `g₀` at fixed `γ₀`.
    Field { gamma0: f64 },
    /// Sweep `γ₀` at fixed `g₀`.
    Anisotropy { g0: f64 },
}

/// One sweep row; `Λ` and `Σ` are divided by `Nβ²δ²` with `δ` the nonzero
/// quench amplitude. `sigma_scaled` is the exact `Σ` for extended rows and
/// `Λ_cl + Λ_qu` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct XyRow {
    pub sweep_var: f64,
    pub fixed_var: f64,
    pub beta: f64,
    pub n: Option<usize>,
    pub lcl_scaled: f64,
    pub lqu_scaled: f64,
    pub sigma_scaled: f64,
    pub error_bound: Option<f64>,
    pub label: &'static str,
}

impl XyRow {
    pub const HEADER: [&'static str; 9] = [
        "sweep_var",
        "beta",
        "N_or_inf",
        "lcl_scaled",
        "lqu_scaled",
        "sigma_scaled",
        "error_bound",
        "fixed_var",
        "label",
    ];
}

#[derive(Debug, Clone)]
pub struct XySweep {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub betas: Vec<f64>,
    pub dg: f64,
    pub dgamma: f64,
    pub evaluation: XyEvaluation,
}

impl XySweep {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.betas.is_empty() {
            return Err(Error::validation("sweep grid and beta list must be non-empty"));
        }
        if self.betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::validation("betas must be finite and non-negative"));
        }
        if (self.dg != 0.0) == (self.dgamma != 0.0) {
            return Err(Error::validation("exactly one of dg and dgamma must be nonzero"));
        }
        if let XyEvaluation::FiniteN(n) | XyEvaluation::Extended(n) = self.evaluation {
            if n == 0 || n % 2 != 0 {
                return Err(Error::validation(format!("chain length must be even and positive, got {n}")));
            }
        }
        if matches!(self.evaluation, XyEvaluation::Extended(_)) && self.betas.contains(&0.0) {
            return Err(Error::validation("extended rows need beta > 0"));
        }
        Ok(())
    }

    fn point(&self, var: f64, beta: f64) -> Result<XyRow> {
        let (g, gamma, fixed) = match self.axis {
            SweepAxis::Field { gamma0 } => (var, gamma0, gamma0),
            SweepAxis::Anisotropy { g0 } => (g0, var, g0),
        };
        let p = XyParams::new(g, gamma, beta, self.dg, self.dgamma, self.evaluation.size())?;
        let delta2 = self.dg * self.dg + self.dgamma * self.dgamma;
        let mut error_bound = None;
        let (l, sigma) = match self.evaluation {
            XyEvaluation::Thermodynamic => {
                let l = lambdas_thermodynamic(&p)?;
                (l, l.total())
            }
            XyEvaluation::SmallBeta => {
                let l = lambdas_small_beta(&p)?;
                (l, l.total())
            }
            XyEvaluation::FiniteN(n) => {
                let l = ising_finite_n(&p)?;
                if gamma == 1.0 && self.dgamma == 0.0 {
                    error_bound = riemann_error_bound(g, n).ok();
                }
                (l, l.total())
            }
            XyEvaluation::Extended(_) => {
                let s = pair_space_finite_n(&p)?;
                (XyLambdas { lcl: s.lcl, lqu: s.lqu }, s.sigma)
            }
        };
        Ok(XyRow {
            sweep_var: var,
            fixed_var: fixed,
            beta,
            n: match self.evaluation.size() {
                ChainSize::Finite(n) => Some(n),
                ChainSize::Thermodynamic => None,
            },
            lcl_scaled: l.lcl / delta2,
            lqu_scaled: l.lqu / delta2,
            sigma_scaled: sigma / delta2,
            error_bound,
            label: self.evaluation.label(),
        })
    }

    /// Rows ordered by β, then by grid index. Points are evaluated in
    /// parallel; the order never depends on scheduling.
    pub fn run(&self) -> Result<Vec<XyRow>> {
        self.validate()?;
        let jobs: Vec<(f64, f64)> =
            self.betas.iter().flat_map(|&b| self.grid.iter().map(move |&v| (v, b))).collect();
        jobs.par_iter().map(|&(v, b)| self.point(v, b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tl(g: f64, gamma: f64, beta: f64) -> XyParams {
        XyParams::thermodynamic(g, gamma, beta, 1.0, 0.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(XyParams::finite(0.5, 1.0, 1.0, 1.0, 0.0, 3).is_err());
        assert!(XyParams::finite(0.5, 1.0, 1.0, 1.0, 0.0, 0).is_err());
        assert!(XyParams::thermodynamic(0.5, 1.0, -1.0, 1.0, 0.0).is_err());
        assert!(XyParams::thermodynamic(f64::NAN, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn symmetric_point_angles() {
        let m = mode_angles(&tl(0.0, 1.0, 1.0), PI / 2.0).unwrap();
        assert!((m.eps_k - 1.0).abs() < 1e-15);
        assert!(m.cos_theta_k.abs() < 1e-15);
        assert!((m.sin_theta_k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn paramagnetic_asymptote() {
        for k in [0.1, 1.0, 3.0] {
            assert!(mode_angles(&tl(1e8, 1.0, 1.0), k).unwrap().cos_theta_k > 1.0 - 1e-15);
        }
    }

    #[test]
    fn rejects_gapless_and_out_of_range_modes() {
        let p = tl(0.5, 0.0, 1.0);
        assert!(matches!(mode_angles(&p, 0.5f64.acos()), Err(Error::GaplessMode { .. })));
        assert!(mode_angles(&p, 0.0).is_err());
        assert!(mode_angles(&p, PI).is_err());
    }

    #[test]
    fn isotropic_quench_has_no_quantum_part() {
        let l = lambdas_thermodynamic(&tl(0.3, 0.0, 2.0)).unwrap();
        assert_eq!(l.lqu, 0.0);
        assert!(l.lcl > 0.0);
    }

    #[test]
    fn small_beta_sums_to_one_half() {
        for g in [-3.0, -0.7, 0.0, 0.5, 1.0, 2.0] {
            for gamma in [0.0, 0.3, 1.0, 2.0] {
                let l = lambdas_small_beta(&tl(g, gamma, 0.0)).unwrap();
                assert!((l.total() - 0.5).abs() < 2e-10, "g={g} γ={gamma}: {}", l.total());
            }
        }
    }

    #[test]
    fn ising_plateau_values() {
        assert_eq!(ising_plateau(0.0), 0.25);
        assert_eq!(ising_plateau(1.0), 0.25);
        assert_eq!(ising_plateau(-2.0), 0.0625);
        for g in [0.0, 0.5, 0.9, 1.5, 2.0, 4.0] {
            let l = lambdas_small_beta(&tl(g, 1.0, 0.0)).unwrap();
            assert!((l.lqu - ising_plateau(g)).abs() < 1e-12, "g = {g}: {}", l.lqu);
        }
    }

    #[test]
    fn thermodynamic_approaches_small_beta() {
        for (g, gamma) in [(0.5, 1.0), (2.0, 0.4), (-0.9, 0.1)] {
            let mut p = tl(g, gamma, 1e-4);
            p.dgamma = 0.3;
            let a = lambdas_thermodynamic(&p).unwrap();
            let b = lambdas_small_beta(&p).unwrap();
            assert!((a.lcl - b.lcl).abs() < 1e-6 && (a.lqu - b.lqu).abs() < 1e-6);
        }
    }

    #[test]
    fn thermodynamic_needs_flag() {
        let p = XyParams::finite(0.5, 1.0, 1.0, 1.0, 0.0, 8).unwrap();
        assert!(lambdas_thermodynamic(&p).is_err());
        assert!(ising_finite_n(&tl(0.5, 1.0, 1.0)).is_err());
    }

    #[test]
    fn two_site_chain_is_one_mode() {
        let p = XyParams::finite(0.3, 1.0, 0.0, 1.0, 0.0, 2).unwrap();
        let m = mode_angles(&p, PI / 2.0).unwrap();
        let l = ising_finite_n(&p).unwrap();
        assert!((l.lcl - 0.5 * m.cos_theta_k.powi(2)).abs() < 1e-16);
        assert!((l.lqu - 0.5 * m.sin_theta_k.powi(2)).abs() < 1e-16);
    }

    #[test]
    fn large_chain_reaches_plateau() {
        let p = XyParams::finite(0.5, 1.0, 0.0, 1.0, 0.0, 4096).unwrap();
        assert!((ising_finite_n(&p).unwrap().lqu - 0.25).abs() < 1e-5);
    }

    #[test]
    fn riemann_bound_values() {
        let v = riemann_error_bound(0.0, 10).unwrap();
        assert!((v - 2.0 * PI.powi(3) / 600.0).abs() < 1e-15);
        assert_eq!(riemann_error_bound(2.0, 10).unwrap(), v);
        assert!(riemann_error_bound(0.999, 10).unwrap() > 1e4);
        assert!(matches!(riemann_error_bound(1.0, 10), Err(Error::Domain(_))));
        assert!(riemann_error_bound(-1.0 + 1e-12, 10).is_err());
    }

    #[test]
    fn curvature_maximum_sits_at_the_boundary() {
        for g0 in [-3.0, -1.5, -0.5, 0.0, 0.3, 0.5, 0.8, 1.2, 2.0, 4.0] {
            let c = check_curvature_bound(g0, 2001).unwrap();
            assert!(c.holds, "g0 = {g0}: {} > {}", c.max_abs_second_derivative, c.bound);
            let rel = (c.max_abs_second_derivative - c.bound).abs() / c.bound;
            assert!(rel < 1e-3, "g0 = {g0}: maximum {} vs M {}", c.max_abs_second_derivative, c.bound);
        }
    }

    #[test]
    fn pair_spectrum() {
        let p = tl(0.0, 1.0, 1.0);
        let (h, dh) = pair_mode_hamiltonian(&p, PI / 2.0).unwrap();
        let s = spectral_decompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let e: Vec<f64> = s.column_energies();
        for (a, b) in e.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(dh.matrix()[(0, 0)].re, -2.0);
        assert!(pair_mode_hamiltonian(&p, 0.0).is_err());
    }

    #[test]
    fn sweep_validation_and_order() {
        let mut s = XySweep {
            axis: SweepAxis::Field { gamma0: 1.0 },
            grid: vec![-0.5, 0.5, 2.0],
            betas: vec![0.1, 1.0],
            dg: 1e-3,
            dgamma: 1e-3,
            evaluation: XyEvaluation::Thermodynamic,
        };
        assert!(s.run().is_err());
        s.dgamma = 0.0;
        let rows = s.run().unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[4].sweep_var, 0.5);
        assert_eq!(rows[4].beta, 1.0);
        assert!(rows.iter().all(|r| r.lcl_scaled >= 0.0 && r.lqu_scaled >= 0.0));
        s.evaluation = XyEvaluation::FiniteN(16);
        let rows = s.run().unwrap();
        assert!(rows[0].error_bound.is_some());
        assert_eq!(rows[0].label, "finite_n");
    }
}
