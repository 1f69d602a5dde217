//! Landau–Zener qubit `H(g) = (g - Δ/2)σ^z + bσ^x`.
//!
//! The avoided crossing sits at `g = Δ/2`; with `b > 0` the mixing angle is
//! smooth, and `b → 0` is only reachable as a limit.

use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, Matrix, C64};
use crate::quench::QuenchSpec;
use crate::special::{ln_cosh, sech2, tanhc};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzParams {
    delta: f64,
    b: f64,
    g: f64,
}

impl LzParams {
    pub fn new(delta: f64, b: f64, g: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::validation(format!("transverse coupling b must be positive, got {b}")));
        }
        if !delta.is_finite() || !g.is_finite() {
            return Err(Error::validation("delta and g must be finite"));
        }
        Ok(Self { delta, b, g })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn critical_field(&self) -> f64 {
        0.5 * self.delta
    }
}

/// `[[g - Δ/2, b], [b, Δ/2 - g]]`.
pub fn hamiltonian(p: &LzParams) -> HermitianOperator {
    let a = p.g - 0.5 * p.delta;
    let m = Matrix::from_row_slice(2, 2, &[
        C64::new(a, 0.0),
        C64::new(p.b, 0.0),
        C64::new(p.b, 0.0),
        C64::new(-a, 0.0),
    ]);
    HermitianOperator::new(m).expect("real symmetric")
}

/// The quench `g → g + dg`, i.e. `ΔH = dg σ^z`.
pub fn quench(p: &LzParams, dg: f64) -> Result<QuenchSpec> {
    let h_at_zero = hamiltonian(&p.with_g(0.0));
    QuenchSpec::linear(h_at_zero, HermitianOperator::pauli_z(), p.g, dg)
}

/// `ε > 0` and the mixing angle `(cos θ, sin θ) = ((g - Δ/2)/ε, b/ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle {
    pub epsilon: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
}

pub fn angle(p: &LzParams) -> MixingAngle {
    let a = p.g - 0.5 * p.delta;
    let epsilon = a.hypot(p.b);
    MixingAngle { epsilon, cos_theta: a / epsilon, sin_theta: p.b / epsilon }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzLambdas {
    pub lambda_cl: f64,
    pub lambda_qu: f64,
}

/// Closed-form `Λ_cl` and `Λ_qu` for `ΔH = dg σ^z`:
/// `½β²δg² sech²(βε) cos²θ` and `½β²δg² [tanh(βε)/(βε)] sin²θ`.
pub fn budget_analytic(p: &LzParams, dg: f64, beta: f64) -> Result<LzLambdas> {
    check_beta(beta)?;
    let scale = 0.5 * beta * beta * dg * dg;
    let s = scaled_lambdas(p, beta);
    Ok(LzLambdas { lambda_cl: scale * s.lambda_cl, lambda_qu: scale * s.lambda_qu })
}

/// `Λ_cl`, `Λ_qu` divided by `½β²δg²`; finite at `β = 0`.
pub fn scaled_lambdas(p: &LzParams, beta: f64) -> LzLambdas {
    let a = angle(p);
    let x = beta * a.epsilon;
    LzLambdas {
        lambda_cl: sech2(x) * a.cos_theta * a.cos_theta,
        lambda_qu: tanhc(x) * a.sin_theta * a.sin_theta,
    }
}

/// Exact `Σ = S(ρ₀‖ρ_τ)` for the quench `g → g + dg`:
/// `-β δg cos θ₀ tanh(βε₀) + ln cosh(βε_τ) - ln cosh(βε₀)`.
///
/// Evaluated in a rearranged form that avoids cancelling the `O(βε)`
/// terms, so small `Σ` keep their relative accuracy at large `βε`.
pub fn sigma_analytic(p: &LzParams, dg: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if dg == 0.0 || beta == 0.0 {
        return Ok(0.0);
    }
    let a0 = p.g - 0.5 * p.delta;
    let at = a0 + dg;
    let e0 = a0.hypot(p.b);
    let et = at.hypot(p.b);
    let b2 = p.b * p.b;
    // ε₀a_τ - a₀ε_τ without cancellation.
    let cross = if a0 * at > 0.0 { b2 * dg * (at + a0) / (e0 * at + a0 * et) } else { e0 * at - a0 * et };
    let d_eps = dg * (at + a0) / (et + e0);
    let u0 = (-2.0 * beta * e0).exp();
    let one_minus_tanh = 2.0 * u0 / (1.0 + u0);
    let lead = beta * dg * cross / (e0 * (et + e0));
    let tail = beta * dg * (a0 / e0) * one_minus_tanh;
    let log_ratio = (u0 * (-2.0 * beta * d_eps).exp_m1() / (1.0 + u0)).ln_1p();
    Ok(lead + tail + log_ratio)
}

/// The same quantity from the textbook form, for cross-checks.
pub fn sigma_analytic_direct(p: &LzParams, dg: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let a0 = angle(p);
    let at = angle(&p.with_g(p.g + dg));
    let x0 = beta * a0.epsilon;
    Ok(-beta * dg * a0.cos_theta * x0.tanh() + ln_cosh(beta * at.epsilon) - ln_cosh(x0))
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::validation(format!("beta must be finite and non-negative, got {beta}")));
    }
    Ok(())
}

/// One row of a field sweep; every value is divided by `½β²δg²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzRow {
    pub g0: f64,
    pub beta: f64,
    pub sigma_scaled: f64,
    pub lcl_scaled: f64,
    pub lqu_scaled: f64,
}

impl LzRow {
    pub const HEADER: [&'static str; 5] = ["g0", "beta", "sigma_scaled", "lcl_scaled", "lqu_scaled"];
}

/// Evaluates one sweep point. At `β = 0` the scaled `Σ` takes its limit 1.
pub fn sweep_point(delta: f64, b: f64, g0: f64, dg: f64, beta: f64) -> Result<LzRow> {
    let p = LzParams::new(delta, b, g0)?;
    check_beta(beta)?;
    if dg == 0.0 || !dg.is_finite() {
        return Err(Error::validation("sweep needs a finite nonzero dg to evaluate the exact sigma"));
    }
    let s = scaled_lambdas(&p, beta);
    let sigma_scaled = if beta == 0.0 { 1.0 } else { sigma_analytic(&p, dg, beta)? / (0.5 * beta * beta * dg * dg) };
    Ok(LzRow { g0, beta, sigma_scaled, lcl_scaled: s.lambda_cl, lqu_scaled: s.lambda_qu })
}

/// Rows ordered by β then by grid index.
pub fn sweep(delta: f64, b: f64, grid: &[f64], dg: f64, betas: &[f64]) -> Result<Vec<LzRow>> {
    if grid.is_empty() || betas.is_empty() {
        return Err(Error::validation("sweep grid and beta list must be non-empty"));
    }
    let mut rows = Vec::with_capacity(grid.len() * betas.len());
    for &beta in betas {
        for &g0 in grid {
            rows.push(sweep_point(delta, b, g0, dg, beta)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{spectral_decompose, split_perturbation, DEFAULT_DEGENERACY_TOL};
    use crate::quench;

    #[test]
    fn rejects_zero_coupling() {
        assert!(LzParams::new(1.0, 0.0, 0.2).is_err());
        assert!(LzParams::new(1.0, -0.1, 0.2).is_err());
    }

    #[test]
    fn hamiltonian_at_crossing_is_b_sigma_x() {
        let p = LzParams::new(1.0, 0.3, 0.5).unwrap();
        assert_eq!(hamiltonian(&p), HermitianOperator::pauli_x().scale(0.3));
    }

    #[test]
    fn hamiltonian_small_b_limit() {
        let p = LzParams::new(1.0, 1e-12, 0.0).unwrap();
        let expect = HermitianOperator::pauli_z().scale(-0.5);
        assert!((hamiltonian(&p).matrix() - expect.matrix()).norm() < 1e-11);
    }

    #[test]
    fn spectrum_matches_epsilon() {
        for &(g, e) in &[(0.3, (0.01f64.powi(2) + 0.04).sqrt()), (0.5, 0.01)] {
            let p = LzParams::new(1.0, 0.01, g).unwrap();
            let s = spectral_decompose(&hamiltonian(&p), DEFAULT_DEGENERACY_TOL).unwrap();
            assert!((s.levels()[0].energy + e).abs() < 1e-15);
            assert!((s.levels()[1].energy - e).abs() < 1e-15);
            assert!((angle(&p).epsilon - e).abs() < 1e-16);
        }
    }

    #[test]
    fn angle_cases() {
        let p = LzParams::new(1.0, 0.01, 0.5).unwrap();
        let a = angle(&p);
        assert_eq!((a.epsilon, a.cos_theta, a.sin_theta), (0.01, 0.0, 1.0));
        let far = angle(&LzParams::new(1.0, 0.01, 1e6).unwrap());
        assert!((far.cos_theta - 1.0).abs() < 1e-15);
        let p = LzParams::new(1.0, 0.01, 0.0).unwrap();
        let a = angle(&p);
        let eps = (0.25f64 + 1e-4).sqrt();
        assert!((a.epsilon - eps).abs() < 1e-15);
        assert!((a.cos_theta + 0.5 / eps).abs() < 1e-15);
        assert!((a.cos_theta.powi(2) + a.sin_theta.powi(2) - 1.0).abs() < 1e-14);
        let s = spectral_decompose(&hamiltonian(&p), DEFAULT_DEGENERACY_TOL).unwrap();
        assert!((s.max_energy() - a.epsilon).abs() < 1e-15);
    }

    #[test]
    fn split_matches_rotated_paulis() {
        // ΔH^d = δg cosθ σ̃^z and ΔH^c = -δg sinθ σ̃^x; compare norms and
        // the sign of the diagonal part on the upper eigenstate.
        let dg = 0.01;
        let p = LzParams::new(1.0, 0.2, 0.3).unwrap();
        let a = angle(&p);
        let s = spectral_decompose(&hamiltonian(&p), DEFAULT_DEGENERACY_TOL).unwrap();
        let (d, c) = split_perturbation(&HermitianOperator::pauli_z().scale(dg), &s).unwrap();
        let up = s.projector(1);
        let d_up = (up.matrix() * d.matrix()).trace().re;
        assert!((d_up - dg * a.cos_theta).abs() < 1e-15);
        assert!((d.hs_norm_sqr() - 2.0 * (dg * a.cos_theta).powi(2)).abs() < 1e-17);
        assert!((c.hs_norm_sqr() - 2.0 * (dg * a.sin_theta).powi(2)).abs() < 1e-17);
    }

    #[test]
    fn crossing_kills_classical_part() {
        let p = LzParams::new(1.0, 0.01, 0.5).unwrap();
        let l = budget_analytic(&p, 1e-3, 5.0).unwrap();
        assert_eq!(l.lambda_cl, 0.0);
        let off = budget_analytic(&p.with_g(0.45), 1e-3, 5.0).unwrap();
        assert!(l.lambda_qu > off.lambda_qu);
    }

    #[test]
    fn beta_zero_split_is_unit() {
        let p = LzParams::new(1.0, 0.01, 0.3).unwrap();
        let l = budget_analytic(&p, 1e-3, 0.0).unwrap();
        assert_eq!((l.lambda_cl, l.lambda_qu), (0.0, 0.0));
        let s = scaled_lambdas(&p, 0.0);
        assert!((s.lambda_cl + s.lambda_qu - 1.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_matches_generic_at_standard_point() {
        let p = LzParams::new(1.0, 0.01, 0.3).unwrap();
        let (dg, beta) = (1e-3, 5.0);
        let l = budget_analytic(&p, dg, beta).unwrap();
        let q = quench(&p, dg).unwrap();
        let b = quench::budget(&q, beta).unwrap();
        assert!((b.lambda_cl - l.lambda_cl).abs() <= 1e-8 * l.lambda_cl);
        assert!((b.lambda_qu - l.lambda_qu).abs() <= 1e-8 * l.lambda_qu);
        let sigma = sigma_analytic(&p, dg, beta).unwrap();
        assert!((b.sigma - sigma).abs() <= 1e-8 * sigma, "{} vs {}", b.sigma, sigma);
    }

    #[test]
    fn sigma_analytic_larger_quench() {
        let p = LzParams::new(1.0, 0.01, 0.3).unwrap();
        let q = quench(&p, 0.01).unwrap();
        let e = quench::entropy_production_exact(&q, 5.0).unwrap();
        let s = sigma_analytic(&p, 0.01, 5.0).unwrap();
        assert!((e.sigma - s).abs() < 1e-8 * s);
    }

    #[test]
    fn rearranged_sigma_matches_direct_form() {
        for &(g, beta, dg) in &[(0.3, 5.0, 1e-3), (0.5, 1.0, 0.02), (0.49, 3.0, 0.02), (-1.0, 0.7, -0.1)] {
            let p = LzParams::new(1.0, 0.05, g).unwrap();
            let a = sigma_analytic(&p, dg, beta).unwrap();
            let b = sigma_analytic_direct(&p, dg, beta).unwrap();
            assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
        }
        let p = LzParams::new(1.0, 0.05, 0.3).unwrap();
        assert_eq!(sigma_analytic(&p, 0.0, 2.0).unwrap(), 0.0);
        assert_eq!(sigma_analytic(&p, 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sweep_rows() {
        let grid: Vec<f64> = (0..=20).map(|i| -0.5 + 0.1 * i as f64).collect();
        let rows = sweep(1.0, 0.01, &grid, 1e-3, &[0.1, 10.0]).unwrap();
        assert_eq!(rows.len(), 42);
        let low_t: Vec<&LzRow> = rows.iter().filter(|r| r.beta == 10.0).collect();
        let peak = low_t.iter().max_by(|a, b| a.sigma_scaled.total_cmp(&b.sigma_scaled)).unwrap();
        assert!((peak.g0 - 0.5).abs() < 0.15, "Σ peak at {}", peak.g0);
        for r in rows.iter().filter(|r| r.beta == 0.1) {
            assert!((r.sigma_scaled - 1.0).abs() < 1e-2);
        }
        for r in &rows {
            assert!(r.lcl_scaled + r.lqu_scaled <= 1.0 + 1e-15);
        }
        assert!(sweep(1.0, 0.01, &[], 1e-3, &[1.0]).is_err());
    }
}
