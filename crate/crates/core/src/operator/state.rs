use nalgebra::SymmetricEigen;

use super::{from_basis, spectral::SpectralDecomposition, to_basis, HermitianOperator, Matrix, C64};
use crate::error::{Error, Result};

/// Smallest eigenvalue a state may have when an operation needs `ln ρ`.
pub const MIN_FULL_RANK_EIGENVALUE: f64 = 1e-14;

const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-12;

/// A density matrix stored together with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    entries: Matrix,
    /// Eigenvalues, paired column-wise with `eigvecs`.
    populations: Vec<f64>,
    eigvecs: Matrix,
    log_partition: Option<f64>,
    /// Exact `ln p_i` for Gibbs states, where tiny populations are known
    /// analytically.
    log_populations: Option<Vec<f64>>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity, then diagonalizes.
    pub fn new(entries: Matrix) -> Result<Self> {
        let h = HermitianOperator::new(entries)?;
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::validation(format!("density matrix trace is {tr}, expected 1")));
        }
        let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, 100_000)
            .ok_or_else(|| Error::numeric("eigensolver did not converge on density matrix"))?;
        let populations: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if let Some(&min) = populations.iter().min_by(|a, b| a.total_cmp(b)) {
            if min < -POSITIVITY_TOL {
                return Err(Error::validation(format!("density matrix has eigenvalue {min:e} < 0")));
            }
        }
        Ok(Self { entries: h.into_matrix(), populations, eigvecs: eig.eigenvectors, log_partition: None, log_populations: None })
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let p = 1.0 / dim as f64;
        Self {
            entries: Matrix::identity(dim, dim).scale(p),
            populations: vec![p; dim],
            eigvecs: Matrix::identity(dim, dim),
            log_partition: None,
            log_populations: Some(vec![p.ln(); dim]),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigvecs
    }

    /// `ln Z` for Gibbs states built by [`thermal_state`].
    pub fn log_partition(&self) -> Option<f64> {
        self.log_partition
    }

    pub fn min_population(&self) -> f64 {
        self.populations.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `-tr ρ ln ρ`.
    pub fn von_neumann_entropy(&self) -> f64 {
        -self.populations.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
    }

    pub fn expectation(&self, x: &HermitianOperator) -> Result<f64> {
        self.check_dim(x.dim())?;
        Ok((&self.entries * x.matrix()).trace().re)
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other });
        }
        Ok(())
    }

    fn require_full_rank(&self, what: &str) -> Result<()> {
        if self.log_populations.is_some() {
            return Ok(());
        }
        let min = self.min_population();
        if min < MIN_FULL_RANK_EIGENVALUE {
            return Err(Error::domain(format!(
                "{what}: state is numerically singular (smallest eigenvalue {min:e})"
            )));
        }
        Ok(())
    }
}

/// Gibbs state `e^{-βH}/Z` built on an existing eigendecomposition.
///
/// Weights use energies shifted by `ε_min`; `ln Z` adds the shift back.
pub fn thermal_state(spec: &SpectralDecomposition, beta: f64) -> Result<DensityOperator> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::validation(format!("beta must be finite and non-negative, got {beta}")));
    }
    let e_min = spec.min_energy();
    let shifted_z: f64 = spec
        .levels()
        .iter()
        .map(|l| l.degeneracy as f64 * (-beta * (l.energy - e_min)).exp())
        .sum();
    let ln_shifted_z = shifted_z.ln();
    let log_populations: Vec<f64> = spec.column_energies().iter().map(|&e| -beta * (e - e_min) - ln_shifted_z).collect();
    let populations: Vec<f64> = spec
        .column_energies()
        .iter()
        .map(|&e| (-beta * (e - e_min)).exp() / shifted_z)
        .collect();
    let d = spec.dim();
    let diag = Matrix::from_fn(d, d, |i, j| if i == j { C64::new(populations[i], 0.0) } else { C64::new(0.0, 0.0) });
    let entries = HermitianOperator::from_matrix_unchecked(from_basis(&diag, spec.basis())).into_matrix();
    Ok(DensityOperator {
        entries,
        populations,
        eigvecs: spec.basis().clone(),
        log_partition: Some(-beta * e_min + ln_shifted_z),
        log_populations: Some(log_populations),
    })
}

/// `Σ_i Π_i ρ Π_i` over the levels of `spec`.
pub fn dephase(rho: &DensityOperator, spec: &SpectralDecomposition) -> Result<DensityOperator> {
    rho.check_dim(spec.dim())?;
    let in_basis = to_basis(rho.matrix(), spec.basis());
    let blocks = spec.block_diagonal_in_basis(&in_basis);
    DensityOperator::new(HermitianOperator::from_matrix_unchecked(from_basis(&blocks, spec.basis())).into_matrix())
}

/// Quantum relative entropy `S(ρ‖σ) = tr ρ(ln ρ - ln σ)` in nats.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.check_dim(sigma.dim())?;
    sigma.require_full_rank("relative entropy")?;
    let overlap = rho.eigenvectors().adjoint() * sigma.eigenvectors();
    let ln_s: Vec<f64> = match &sigma.log_populations {
        Some(l) => l.clone(),
        None => sigma.populations().iter().map(|s| s.ln()).collect(),
    };
    let mut total = 0.0;
    for (a, &r) in rho.populations().iter().enumerate() {
        if r <= 0.0 {
            continue;
        }
        let ln_r = rho.log_populations.as_ref().map_or_else(|| r.ln(), |l| l[a]);
        let cross: f64 = overlap.row(a).iter().zip(&ln_s).map(|(w, ls)| w.norm_sqr() * ls).sum();
        total += r * (ln_r - cross);
    }
    Ok(total)
}

/// `tr(X²ρ) - tr(Xρ)²`, evaluated with the mean subtracted first.
pub fn variance(rho: &DensityOperator, x: &HermitianOperator) -> Result<f64> {
    rho.check_dim(x.dim())?;
    let y = to_basis(x.matrix(), rho.eigenvectors());
    let p = rho.populations();
    let mean: f64 = p.iter().enumerate().map(|(a, pa)| pa * y[(a, a)].re).sum();
    let mut var = 0.0;
    for (a, &pa) in p.iter().enumerate() {
        let row: f64 = (0..p.len())
            .map(|b| {
                let shift = if a == b { mean } else { 0.0 };
                (y[(a, b)] - C64::new(shift, 0.0)).norm_sqr()
            })
            .sum();
        var += pa * row;
    }
    Ok(var)
}

/// `∫₀¹ I^y(ρ, X) dy` for the Wigner–Yanase–Dyson skew information
/// `I^y = -½ tr([ρ^y, X][ρ^{1-y}, X])`.
///
/// In the eigenbasis of `ρ` the y-integral is elementary and equals
/// `Σ_{a<b} |X_ab|² (p_a + p_b - 2 L(p_a, p_b))` with `L` the logarithmic
/// mean.
pub fn skew_information_y_integral(rho: &DensityOperator, x: &HermitianOperator) -> Result<f64> {
    rho.check_dim(x.dim())?;
    rho.require_full_rank("skew information")?;
    let y = to_basis(x.matrix(), rho.eigenvectors());
    let p = rho.populations();
    let mut total = 0.0;
    for a in 0..p.len() {
        for b in (a + 1)..p.len() {
            total += y[(a, b)].norm_sqr() * 2.0 * arithmetic_minus_log_mean(p[a], p[b]);
        }
    }
    Ok(total)
}

/// Splits `ΔH` into its block-diagonal part in the eigenbasis of `spec0`
/// and the remainder.
pub fn split_perturbation(
    delta_h: &HermitianOperator,
    spec0: &SpectralDecomposition,
) -> Result<(HermitianOperator, HermitianOperator)> {
    delta_h.check_dim(spec0.dim())?;
    let in_basis = to_basis(delta_h.matrix(), spec0.basis());
    let diag_blocks = spec0.block_diagonal_in_basis(&in_basis);
    let coherent = &in_basis - &diag_blocks;
    Ok((
        HermitianOperator::from_matrix_unchecked(from_basis(&diag_blocks, spec0.basis())),
        HermitianOperator::from_matrix_unchecked(from_basis(&coherent, spec0.basis())),
    ))
}

/// `u / atanh(u)` for `|u| < 1`.
fn u_over_atanh(u: f64) -> f64 {
    1.0 - one_minus_u_over_atanh(u)
}

/// `1 - u/atanh(u)`, series for small `|u|` to avoid cancellation.
fn one_minus_u_over_atanh(u: f64) -> f64 {
    let u2 = u * u;
    if u.abs() < 1e-2 {
        u2 * (1.0 / 3.0 + u2 * (4.0 / 45.0 + u2 * (44.0 / 945.0 + u2 * 428.0 / 14175.0)))
    } else {
        1.0 - u / u.atanh()
    }
}

/// Logarithmic mean `(a - b)/(ln a - ln b)`, with `L(a, a) = a`.
pub fn log_mean(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    if m <= 0.0 {
        return 0.0;
    }
    let u = (a - b) / (a + b);
    if u.abs() > 0.5 {
        if a.min(b) <= 0.0 {
            return 0.0;
        }
        (a - b) / (a.ln() - b.ln())
    } else {
        m * u_over_atanh(u)
    }
}

/// `(a + b)/2 - L(a, b) ≥ 0`.
fn arithmetic_minus_log_mean(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let u = (a - b) / (a + b);
    if u.abs() > 0.5 {
        m - log_mean(a, b)
    } else {
        m * one_minus_u_over_atanh(u)
    }
}
