//! Reconstruction constants, as printed and as measured.
//!
//! With `ω = (n−1)! ι_x dV` (density `2 sin θ` on `S²`) and the bracket
//! `[x+u, ζ, dζ^{n−2}] = (n−2)! det(x+u, ζ, ∂ζ)`, integrating the fundamental
//! form over the standard-oriented geodesic cycle gives `2(2πi)^{n−1}(n−1)!`
//! times `f(x)`. The printed constant carries `(n−1)!` in the denominator
//! instead; the two differ by the real factor `((n−1)!)²`. The phase agrees, so
//! the unimodular calibration factor is exactly one.
//!
//! The horospherical inversion prefactors follow by the same substitution.

use num_complex::Complex64;

use crate::quadratic::factorial;

/// Unimodular factor between the measured constant and the corrected formula.
pub const UNIMODULAR_CALIBRATION: Complex64 = Complex64::new(1.0, 0.0);

/// Fourier index `k` of the circle action `ζ ↦ e^{iθ}ζ` carrying harmonic degree `ℓ = k`.
pub fn circle_mode_for_degree(degree: usize) -> i64 {
    degree as i64
}

fn two_pi_i_pow(k: usize) -> Complex64 {
    Complex64::new(0.0, std::f64::consts::TAU).powi(k as i32)
}

/// `c = 2(2πi)^{n−1}/(n−1)!` exactly as printed.
pub fn reconstruction_constant_printed(n: usize) -> Complex64 {
    two_pi_i_pow(n - 1) * 2.0 / factorial(n - 1)
}

/// `2(2πi)^{n−1}(n−1)!`, the constant realized by the normalizations above.
pub fn reconstruction_constant(n: usize) -> Complex64 {
    two_pi_i_pow(n - 1) * 2.0 * factorial(n - 1) * UNIMODULAR_CALIBRATION
}

/// Ratio of the realized to the printed constant, `((n−1)!)²`.
pub fn normalization_ratio(n: usize) -> f64 {
    factorial(n - 1).powi(2)
}

/// Printed hyperbolic prefactor `(n−1)/(2(2πi)^{n−1})`.
pub fn hyperbolic_prefactor_printed(n: usize) -> Complex64 {
    (n as f64 - 1.0) / (two_pi_i_pow(n - 1) * 2.0)
}

/// `1/(2(2πi)^{n−1}(n−1)!(n−2)!)`: the printed prefactor divided by `((n−1)!)²`.
pub fn hyperbolic_prefactor(n: usize) -> Complex64 {
    1.0 / (two_pi_i_pow(n - 1) * 2.0 * factorial(n - 1) * factorial(n - 2))
}

/// Printed sphere prefactor `(n−1)/(2(2π)^{n−1})`.
pub fn sphere_prefactor_printed(n: usize) -> f64 {
    (n as f64 - 1.0) / (2.0 * std::f64::consts::TAU.powi(n as i32 - 1))
}

/// `1/(2(2π)^{n−1}(n−1)!(n−2)!)`.
pub fn sphere_prefactor(n: usize) -> f64 {
    1.0 / (2.0 * std::f64::consts::TAU.powi(n as i32 - 1) * factorial(n - 1) * factorial(n - 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn three_dimensional_values() {
        assert!((reconstruction_constant_printed(3) - Complex64::new(-4.0 * PI * PI, 0.0)).norm() < 1e-12);
        assert!((reconstruction_constant(3) - Complex64::new(-16.0 * PI * PI, 0.0)).norm() < 1e-12);
        assert!((sphere_prefactor_printed(3) - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((sphere_prefactor(3) - 1.0 / (16.0 * PI * PI)).abs() < 1e-15);
        assert!((hyperbolic_prefactor(3) - Complex64::new(-1.0 / (16.0 * PI * PI), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ratios_are_consistent() {
        for n in 3..7 {
            let r = reconstruction_constant(n) / reconstruction_constant_printed(n);
            assert!((r.re - normalization_ratio(n)).abs() < 1e-9 * normalization_ratio(n) && r.im.abs() < 1e-9);
            let h = hyperbolic_prefactor_printed(n) / hyperbolic_prefactor(n);
            assert!((h.re - normalization_ratio(n)).abs() < 1e-9 * normalization_ratio(n));
            assert!((sphere_prefactor_printed(n) / sphere_prefactor(n) - normalization_ratio(n)).abs() < 1e-9 * normalization_ratio(n));
        }
    }
}
