//! Scalar functions of the thermal factors `βε`.

/// `tanh(x)/x`, with its Taylor series near zero.
pub fn tanhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}

/// `sech²(x)` without overflow for large `|x|`.
pub fn sech2(x: f64) -> f64 {
    let e = (-2.0 * x.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// `ln cosh(x)`, stable for large `|x|`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_large_arguments() {
        assert!((tanhc(1e-6) - 1.0).abs() < 1e-12);
        assert!((tanhc(2.0) - 2f64.tanh() / 2.0).abs() < 1e-16);
        assert!((tanhc(-0.5) - tanhc(0.5)).abs() == 0.0);
        assert!((sech2(0.3) - 1.0 / 0.3f64.cosh().powi(2)).abs() < 1e-15);
        assert!(sech2(800.0) >= 0.0);
        assert!((ln_cosh(0.7) - 0.7f64.cosh().ln()).abs() < 1e-15);
        assert!((ln_cosh(-400.0) - (400.0 - std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn series_joins_smoothly() {
        let x = 1e-4;
        assert!((tanhc(x * (1.0 - 1e-12)) - x.tanh() / x).abs() < 1e-15);
    }
}
