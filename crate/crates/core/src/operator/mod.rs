//! Dense Hermitian operator algebra.
//!
//! Every matrix function in this module goes through an eigendecomposition;
//! Hermitian inputs make that route stable and there is no need for series or
//! Padé approximants.

mod spectral;
mod state;

pub use spectral::{spectral_decompose, EnergyLevel, SpectralDecomposition, DEFAULT_DEGENERACY_TOL};
pub use state::{
    dephase, log_mean, relative_entropy, skew_information_y_integral, split_perturbation,
    thermal_state, variance, DensityOperator, MIN_FULL_RANK_EIGENVALUE,
};

use nalgebra::{Complex, DMatrix};
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Matrix = DMatrix<C64>;

/// Relative tolerance on `|A - A†|`, measured against the largest entry.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A dense Hermitian matrix.
///
/// Construction validates Hermiticity and then symmetrizes, so downstream
/// eigensolvers see an exactly Hermitian array.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: Matrix,
}

impl HermitianOperator {
    pub fn new(entries: Matrix) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows == 0 {
            return Err(Error::validation("operator dimension must be at least 1"));
        }
        if rows != cols {
            return Err(Error::validation(format!("operator must be square, got {rows}x{cols}")));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("operator has non-finite entries"));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..rows {
            for j in i..rows {
                let dev = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                if dev > HERMITICITY_TOL * scale {
                    return Err(Error::validation(format!(
                        "operator is not Hermitian: |A[{i},{j}] - conj(A[{j},{i}])| = {dev:e}"
                    )));
                }
            }
        }
        Ok(Self::from_matrix_unchecked(entries))
    }

    /// Symmetrizes without checking. For internal constructions that are
    /// Hermitian by algebra.
    pub(crate) fn from_matrix_unchecked(entries: Matrix) -> Self {
        let adj = entries.adjoint();
        let entries = (entries + adj).scale(0.5);
        Self { entries }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::validation("rows must all have length equal to the row count"));
        }
        Self::new(Matrix::from_fn(d, d, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        Self::new(Matrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: Matrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: Matrix::zeros(dim, dim) }
    }

    pub fn pauli_x() -> Self {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        m[(1, 0)] = C64::new(1.0, 0.0);
        Self { entries: m }
    }

    pub fn pauli_y() -> Self {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, -1.0);
        m[(1, 0)] = C64::new(0.0, 1.0);
        Self { entries: m }
    }

    /// `diag(1, -1)`.
    pub fn pauli_z() -> Self {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(-1.0, 0.0);
        Self { entries: m }
    }

    /// Random Hermitian matrix with entries uniform in the unit box.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let m = Matrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        Self::from_matrix_unchecked(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { entries: self.entries.scale(factor) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self { entries: &self.entries + &other.entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self { entries: &self.entries - &other.entries })
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self { entries: &self.entries + other.entries.scale(factor) })
    }

    /// Shifts by a multiple of the identity so the trace vanishes.
    pub fn traceless(&self) -> Self {
        let shift = self.trace() / self.dim() as f64;
        let mut entries = self.entries.clone();
        for i in 0..self.dim() {
            entries[(i, i)] -= C64::new(shift, 0.0);
        }
        Self { entries }
    }

    /// `tr(A²)`, i.e. the squared Hilbert–Schmidt norm.
    pub fn hs_norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `[A, B] = 0` within `tol` (Frobenius norm of the commutator relative
    /// to `‖A‖‖B‖`).
    pub fn commutes_with(&self, other: &Self, tol: f64) -> bool {
        let c = &self.entries * &other.entries - &other.entries * &self.entries;
        let scale = (self.hs_norm_sqr() * other.hs_norm_sqr()).sqrt().max(f64::MIN_POSITIVE);
        c.norm() <= tol * scale
    }

    pub(crate) fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other });
        }
        Ok(())
    }
}

/// `V† X V`.
pub(crate) fn to_basis(x: &Matrix, basis: &Matrix) -> Matrix {
    basis.adjoint() * x * basis
}

/// `V X V†`.
pub(crate) fn from_basis(x: &Matrix, basis: &Matrix) -> Matrix {
    basis * x * basis.adjoint()
}
