use std::ops::Range;

use nalgebra::SymmetricEigen;

use super::{from_basis, HermitianOperator, Matrix, C64};
use crate::error::{Error, Result};

/// Eigenvalues closer than `tol * (ε_max - ε_min + 1)` are merged into one level.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

const EIGEN_MAX_ITER: usize = 100_000;

/// One (possibly degenerate) eigenvalue together with the columns of the
/// eigenbasis spanning its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLevel {
    pub energy: f64,
    pub degeneracy: usize,
    columns: Range<usize>,
}

impl EnergyLevel {
    pub fn columns(&self) -> Range<usize> {
        self.columns.clone()
    }
}

/// `H = Σ_i ε_i Π_i` with strictly increasing `ε_i`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    levels: Vec<EnergyLevel>,
    basis: Matrix,
    /// Level of each basis column.
    column_level: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.levels.len() == self.dim()
    }

    /// Unitary whose columns are eigenvectors, grouped by level in
    /// increasing energy order.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Eigenvalue attached to each basis column (degenerate columns share the
    /// level energy exactly).
    pub fn column_energies(&self) -> Vec<f64> {
        self.column_level.iter().map(|&l| self.levels[l].energy).collect()
    }

    pub fn column_level(&self, column: usize) -> usize {
        self.column_level[column]
    }

    pub fn min_energy(&self) -> f64 {
        self.levels[0].energy
    }

    pub fn max_energy(&self) -> f64 {
        self.levels[self.levels.len() - 1].energy
    }

    /// Orthogonal projector onto level `index`.
    pub fn projector(&self, index: usize) -> HermitianOperator {
        let cols = self.levels[index].columns();
        let v = self.basis.columns(cols.start, cols.len());
        HermitianOperator::from_matrix_unchecked(&v * v.adjoint())
    }

    /// `Σ_i ε_i Π_i`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let d = self.dim();
        let energies = self.column_energies();
        let diag = Matrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(energies[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        HermitianOperator::from_matrix_unchecked(from_basis(&diag, &self.basis))
    }

    /// Zeroes every entry of `x` (given in this eigenbasis) that couples two
    /// different levels.
    pub(crate) fn block_diagonal_in_basis(&self, x: &Matrix) -> Matrix {
        let d = self.dim();
        Matrix::from_fn(d, d, |i, j| {
            if self.column_level[i] == self.column_level[j] {
                x[(i, j)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// Diagonalizes `h` and groups eigenvalues into levels.
pub fn spectral_decompose(h: &HermitianOperator, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    if !(degeneracy_tol > 0.0) || !degeneracy_tol.is_finite() {
        return Err(Error::validation("degeneracy tolerance must be positive and finite"));
    }
    let d = h.dim();
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::numeric("Hermitian eigensolver did not converge"))?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let basis = Matrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);

    let span = values[d - 1] - values[0];
    let merge = degeneracy_tol * (span + 1.0);

    let mut levels = Vec::new();
    let mut column_level = vec![0; d];
    let mut start = 0;
    for i in 1..=d {
        if i == d || values[i] - values[i - 1] > merge {
            let members = &values[start..i];
            let energy = members.iter().sum::<f64>() / members.len() as f64;
            for c in column_level.iter_mut().take(i).skip(start) {
                *c = levels.len();
            }
            levels.push(EnergyLevel { energy, degeneracy: i - start, columns: start..i });
            start = i;
        }
    }

    Ok(SpectralDecomposition { levels, basis, column_level })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::to_basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frob(m: &Matrix) -> f64 {
        m.norm()
    }

    #[test]
    fn identity_is_one_level() {
        let s = spectral_decompose(&HermitianOperator::identity(3), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(s.num_levels(), 1);
        assert_eq!(s.levels()[0].degeneracy, 3);
        assert!((s.levels()[0].energy - 1.0).abs() < 1e-15);
        assert!(frob(&(s.projector(0).into_matrix() - Matrix::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn pauli_z_levels() {
        let s = spectral_decompose(&HermitianOperator::pauli_z(), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(s.num_levels(), 2);
        assert!((s.levels()[0].energy + 1.0).abs() < 1e-15);
        assert!((s.levels()[1].energy - 1.0).abs() < 1e-15);
        // -1 lives on the second computational state.
        let p_low = s.projector(0);
        assert!((p_low.matrix()[(1, 1)].re - 1.0).abs() < 1e-14);
        assert!(p_low.matrix()[(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn merges_within_tolerance() {
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 1.0 + 1e-12, 2.0]).unwrap();
        let s = spectral_decompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(s.num_levels(), 3);
        assert_eq!(s.levels()[1].degeneracy, 2);
        let s = spectral_decompose(&h, 1e-15).unwrap();
        assert_eq!(s.num_levels(), 4);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(spectral_decompose(&HermitianOperator::pauli_x(), 0.0).is_err());
        assert!(spectral_decompose(&HermitianOperator::pauli_x(), f64::NAN).is_err());
    }

    #[test]
    fn projector_algebra_on_random_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=7 {
            // Force a degeneracy by building the operator from a chosen spectrum.
            let u = spectral_decompose(&HermitianOperator::random(&mut rng, d), 1e-9).unwrap();
            let mut spec: Vec<f64> = (0..d).map(|i| (i / 2) as f64 * 0.7 - 1.0).collect();
            spec.reverse();
            let diag = Matrix::from_fn(d, d, |i, j| if i == j { C64::new(spec[i], 0.0) } else { C64::new(0.0, 0.0) });
            let h = HermitianOperator::from_matrix_unchecked(from_basis(&diag, u.basis()));
            let s = spectral_decompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
            assert_eq!(s.num_levels(), (d + 1) / 2);

            let mut sum = Matrix::zeros(d, d);
            for i in 0..s.num_levels() {
                let pi = s.projector(i);
                assert!((pi.trace() - s.levels()[i].degeneracy as f64).abs() < 1e-10);
                for j in 0..s.num_levels() {
                    let pj = s.projector(j);
                    let prod = pi.matrix() * pj.matrix();
                    let expect = if i == j { pi.matrix().clone() } else { Matrix::zeros(d, d) };
                    assert!(frob(&(prod - expect)) < 1e-10);
                }
                sum += pi.matrix();
            }
            assert!(frob(&(sum - Matrix::identity(d, d))) < 1e-10);
            let rel = frob(&(s.reconstruct().into_matrix() - h.matrix())) / frob(h.matrix());
            assert!(rel < 1e-10, "reconstruction error {rel}");
            for w in s.levels().windows(2) {
                assert!(w[0].energy < w[1].energy);
            }
            // Basis is unitary.
            let vv = to_basis(&Matrix::identity(d, d), s.basis());
            assert!(frob(&(vv - Matrix::identity(d, d))) < 1e-12);
        }
    }
}
