//! Gauss–Legendre quadrature: fixed rules and an adaptive composite driver.
//!
//! The adaptive driver bisects panels until the 32-point estimate on a panel
//! agrees with the sum over its two halves. Open rules never evaluate the
//! integrand at panel endpoints, so integrable point singularities placed on
//! a breakpoint are never hit.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on `[a, b]` to a vector-valued integrand.
    pub fn integrate<const N: usize, F>(&self, a: f64, b: f64, f: &mut F) -> Result<[f64; N]>
    where
        F: FnMut(f64) -> Result<[f64; N]>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; N];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x)?;
            for (s, vi) in acc.iter_mut().zip(v) {
                *s += w * vi;
            }
        }
        Ok(acc.map(|s| s * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 32-point rule used by the adaptive driver.
pub fn gauss_legendre_32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Absolute tolerance on every component of the integral.
    pub abs_tol: f64,
    /// Bisection depth limit per initial panel.
    pub max_depth: u32,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, max_depth: 40 }
    }
}

/// Adaptive composite Gauss–Legendre integration of a vector-valued
/// integrand over `[a, b]`, with optional interior breakpoints.
pub fn integrate_adaptive<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: AdaptiveOptions,
) -> Result<[f64; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    if !(a < b) {
        return Err(Error::validation(format!("integration bounds must satisfy a < b, got [{a}, {b}]")));
    }
    let rule = gauss_legendre_32();
    let mut edges = vec![a];
    let mut interior: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    edges.extend(interior);
    edges.push(b);

    let total_width = b - a;
    let mut acc = [0.0; N];
    let mut stack: Vec<(f64, f64, u32, [f64; N])> = Vec::new();
    for w in edges.windows(2) {
        let est = rule.integrate(w[0], w[1], &mut f)?;
        stack.push((w[0], w[1], 0, est));
    }
    while let Some((lo, hi, depth, whole)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f)?;
        let right = rule.integrate(mid, hi, &mut f)?;
        let local_tol = opts.abs_tol * (hi - lo) / total_width;
        let err = (0..N).map(|i| (left[i] + right[i] - whole[i]).abs()).fold(0.0, f64::max);
        if err <= local_tol {
            for i in 0..N {
                acc[i] += left[i] + right[i];
            }
        } else if depth >= opts.max_depth {
            return Err(Error::numeric(format!(
                "adaptive quadrature did not converge on [{lo}, {hi}] (error estimate {err:e})"
            )));
        } else {
            stack.push((lo, mid, depth + 1, left));
            stack.push((mid, hi, depth + 1, right));
        }
    }
    if acc.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("quadrature produced a non-finite value"));
    }
    Ok(acc)
}
