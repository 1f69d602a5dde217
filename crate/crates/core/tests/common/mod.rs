#![allow(dead_code)]

use quench_core::operator::{spectral_decompose, thermal_state, C64, DEFAULT_DEGENERACY_TOL};
use quench_core::{DensityOperator, HermitianOperator, Matrix, QuenchSpec};
use rand::Rng;

/// Random Hermitian operator rescaled to unit operator norm.
pub fn unit_hermitian<R: Rng>(rng: &mut R, d: usize) -> HermitianOperator {
    let h = HermitianOperator::random(rng, d);
    let n = h.op_norm();
    h.scale(1.0 / n)
}

/// Random `H₀` whose spectral spread times `beta` is at most `max_beta_spread`.
pub fn bounded_hamiltonian<R: Rng>(rng: &mut R, d: usize, beta: f64, max_beta_spread: f64) -> HermitianOperator {
    let h = unit_hermitian(rng, d);
    let s = spectral_decompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
    let spread = s.max_energy() - s.min_energy();
    let scale = if beta * spread > max_beta_spread { max_beta_spread / (beta * spread) } else { 1.0 };
    h.scale(scale)
}

/// Quench `H₀ → H₀ + δg H₁` with `‖H₁‖ = 1` and `βδg = beta_dg`.
pub fn random_quench<R: Rng>(rng: &mut R, d: usize, beta: f64, beta_dg: f64) -> QuenchSpec {
    let h0 = bounded_hamiltonian(rng, d, beta, 20.0);
    let h1 = unit_hermitian(rng, d);
    QuenchSpec::linear(h0, h1, 0.0, beta_dg / beta).unwrap()
}

/// Log-uniform sample in `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Full-rank random state: Gibbs state of a random operator.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> DensityOperator {
    let h = bounded_hamiltonian(rng, d, 1.0, 8.0);
    let s = spectral_decompose(&h, DEFAULT_DEGENERACY_TOL).unwrap();
    thermal_state(&s, 1.0).unwrap()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Dense real symmetric matrix, row-major.
pub type Real = Vec<Vec<f64>>;

/// `[[Re A, -Im A], [Im A, Re A]]`: a real symmetric matrix whose spectrum
/// is that of the Hermitian `A`, each eigenvalue doubled.
pub fn real_embedding(a: &Matrix) -> Real {
    let d = a.nrows();
    let mut r = vec![vec![0.0; 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            let z = a[(i, j)];
            r[i][j] = z.re;
            r[i + d][j + d] = z.re;
            r[i][j + d] = -z.im;
            r[i + d][j] = z.im;
        }
    }
    r
}

/// Cyclic Jacobi eigensolver: returns eigenvalues and the matrix whose
/// columns are the eigenvectors.
pub fn jacobi_eigh(a: &Real) -> (Vec<f64>, Real) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Real = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        let total: f64 = a.iter().flatten().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// `f(A)` for a real symmetric `A` via [`jacobi_eigh`].
pub fn real_function(a: &Real, f: impl Fn(f64) -> f64) -> Real {
    let (w, v) = jacobi_eigh(a);
    let n = a.len();
    let fw: Vec<f64> = w.into_iter().map(f).collect();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| v[i][k] * fw[k] * v[j][k]).sum()).collect()).collect()
}

pub fn real_mul(a: &Real, b: &Real) -> Real {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub fn real_trace(a: &Real) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn real_sub(a: &Real, b: &Real) -> Real {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

/// Complex matrix from real and imaginary parts, row-major.
pub fn cmatrix(d: usize, re: &[f64], im: &[f64]) -> Matrix {
    Matrix::from_fn(d, d, |i, j| C64::new(re[i * d + j], im[i * d + j]))
}
