//! Hyperbolic functions of complex arguments written through `e^{-z}` so
//! they stay finite for any `Re z >= 0`.
//!
//! The arguments produced by the impedance code are principal square roots
//! and therefore always lie in the closed right half plane. For `Re z < 0`
//! the functions fall back to the odd/even symmetry.

use num_complex::Complex64;

/// `e^z - 1` without cancellation near the origin.
pub fn exp_m1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    let cos_m1 = -2.0 * half * half;
    Complex64::new(x.exp_m1() * y.cos() + cos_m1, x.exp() * y.sin())
}

/// `1 - e^{-2z}`, the common denominator.
fn one_minus_e2(z: Complex64) -> Complex64 {
    -exp_m1(-2.0 * z)
}

pub fn tanh(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return -tanh(-z);
    }
    let e2 = (-2.0 * z).exp();
    one_minus_e2(z) / (1.0 + e2)
}

pub fn coth(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return -coth(-z);
    }
    let e2 = (-2.0 * z).exp();
    (1.0 + e2) / one_minus_e2(z)
}

pub fn csch(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return -csch(-z);
    }
    2.0 * (-z).exp() / one_minus_e2(z)
}

/// `cosh(z ξ) / sinh(z)` for `ξ` in `[0, 1]`.
pub fn cosh_over_sinh(z: Complex64, xi: f64) -> Complex64 {
    if z.re < 0.0 {
        return -cosh_over_sinh(-z, xi);
    }
    ((z * (xi - 1.0)).exp() + (-z * (xi + 1.0)).exp()) / one_minus_e2(z)
}

/// `tanh z − z`, by its Taylor series where the direct difference cancels.
pub fn tanh_minus_id(z: Complex64) -> Complex64 {
    if z.norm() < 0.05 {
        let z2 = z * z;
        let z3 = z2 * z;
        z3 * (-1.0 / 3.0 + z2 * (2.0 / 15.0 + z2 * (-17.0 / 315.0 + z2 * (62.0 / 2835.0))))
    } else {
        tanh(z) - z
    }
}

/// Principal square root with `Re >= 0`.
pub fn sqrt(z: Complex64) -> Complex64 {
    z.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn agrees_with_library_for_moderate_arguments() {
        for z in [c(0.3, 0.7), c(2.0, -1.0), c(-0.4, 0.2), c(0.0, 1.3)] {
            assert_relative_eq!((tanh(z) - z.tanh()).norm(), 0.0, epsilon = 1e-14);
            assert_relative_eq!((coth(z) - 1.0 / z.tanh()).norm(), 0.0, epsilon = 1e-13);
            assert_relative_eq!((csch(z) - 1.0 / z.sinh()).norm(), 0.0, epsilon = 1e-13);
            let r = (z * 0.3).cosh() / z.sinh();
            assert!((cosh_over_sinh(z, 0.3) - r).norm() <= 1e-13 * r.norm());
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let z = c(1e5, 1e5);
        assert_eq!(tanh(z), c(1.0, 0.0));
        assert_eq!(coth(z), c(1.0, 0.0));
        assert_eq!(csch(z), c(0.0, 0.0));
        assert!(cosh_over_sinh(z, 1.0).is_finite());
    }

    #[test]
    fn series_branch_is_continuous() {
        for phase in [0.0, 0.4, 0.785] {
            let z = Complex64::from_polar(0.0499999, phase);
            let series = tanh_minus_id(z);
            let direct = tanh(z) - z;
            assert!((series - direct).norm() < 1e-11 * series.norm(), "{series} {direct}");
        }
    }

    #[test]
    fn expm1_small() {
        let z = c(1e-12, -2e-12);
        assert_relative_eq!(exp_m1(z).re, 1e-12, max_relative = 1e-9);
        assert_relative_eq!(exp_m1(z).im, -2e-12, max_relative = 1e-9);
    }
}
