//! Hyperplane sections `⟨ζ, x⟩ = p` and transform values.

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::quadratic::QuadraticSpace;

/// Relative tolerance of the isotropy test `|□ζ| ≤ tol·|ζ|²`.
pub const ISOTROPY_TOL: f64 = 1e-10;

/// Section of `X` by the complex hyperplane `⟨ζ, x⟩ = p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    space: QuadraticSpace,
    zeta: Vec<Complex64>,
    p: Complex64,
}

impl Section {
    pub fn new(space: QuadraticSpace, zeta: Vec<Complex64>, p: Complex64) -> Result<Self> {
        check_dim(space.n(), zeta.len())?;
        if zeta.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(Error::Input("section normal ζ must be nonzero".into()));
        }
        if zeta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::Input("section data must be finite".into()));
        }
        Ok(Self { space, zeta, p })
    }

    pub fn real(space: QuadraticSpace, xi: &[f64], p: f64) -> Result<Self> {
        Self::new(space, xi.iter().map(|&v| Complex64::new(v, 0.0)).collect(), Complex64::new(p, 0.0))
    }

    /// `ζ = ξ + iη`.
    pub fn complex(space: QuadraticSpace, xi: &[f64], eta: &[f64], p: Complex64) -> Result<Self> {
        check_dim(xi.len(), eta.len())?;
        Self::new(space, xi.iter().zip(eta).map(|(a, b)| Complex64::new(*a, *b)).collect(), p)
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn zeta(&self) -> &[Complex64] {
        &self.zeta
    }

    pub fn p(&self) -> Complex64 {
        self.p
    }

    pub fn xi(&self) -> Vec<f64> {
        self.zeta.iter().map(|z| z.re).collect()
    }

    pub fn eta(&self) -> Vec<f64> {
        self.zeta.iter().map(|z| z.im).collect()
    }

    pub fn is_real(&self) -> bool {
        self.zeta.iter().all(|z| z.im == 0.0) && self.p.im == 0.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.zeta.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn box_zeta(&self) -> Complex64 {
        self.space.pair_unchecked(&self.zeta, &self.zeta)
    }

    pub fn is_horosphere(&self) -> bool {
        self.box_zeta().norm() <= ISOTROPY_TOL * self.norm_sqr()
    }

    /// Same section with `(λζ, λp)`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { space: self.space, zeta: self.zeta.iter().map(|z| z * lambda).collect(), p: self.p * lambda }
    }

    pub fn with_p(&self, p: Complex64) -> Self {
        Self { p, ..self.clone() }
    }

    /// `⟨ζ, x⟩ − p` at a real point.
    pub fn defect(&self, x: &[f64]) -> Complex64 {
        self.space.pair_cr(&self.zeta, x) - self.p
    }
}

/// How the `−i0` limit was realized.
#[derive(Clone, Debug, PartialEq)]
pub enum Regularization {
    /// No singularity on the support: plain quadrature.
    Direct,
    /// Principal value plus `iπ` times the level-set integral.
    PvDelta,
    /// Values on the ladder `ε_k = ε₀ 2^{-k}` extrapolated to `ε = 0`.
    EpsExtrapolation { ladder: Vec<f64> },
    /// Fixed `ε > 0`, no limit taken.
    FixedEps(f64),
}

/// A complex value with an error estimate and its regularization record.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub regularization: Regularization,
}

impl TransformValue {
    pub fn new(value: Complex64, error_estimate: f64, regularization: Regularization) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite() && error_estimate.is_finite()) {
            return Err(Error::NonFinite(vec![value.re, value.im, error_estimate]));
        }
        Ok(Self { value, error_estimate, regularization })
    }
}

/// `1/(t − iε)^m`.
pub fn cauchy_kernel(t: Complex64, eps: f64, m: u32) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::Input("kernel order must be positive".into()));
    }
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::Input("eps must be a finite nonnegative number".into()));
    }
    let d = t - Complex64::new(0.0, eps);
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularKernel);
    }
    Ok(d.powi(-(m as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let one = cauchy_kernel(Complex64::new(1.0, 0.0), 0.0, 1).unwrap();
        assert_eq!(one, Complex64::new(1.0, 0.0));
        let i = cauchy_kernel(Complex64::new(0.0, 0.0), 1.0, 1).unwrap();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(cauchy_kernel(Complex64::new(0.0, 0.0), 0.0, 1), Err(Error::SingularKernel));
    }

    #[test]
    fn horosphere_flag() {
        let s = QuadraticSpace::sphere(3).unwrap();
        let h = Section::complex(s, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], Complex64::new(1.0, 0.0)).unwrap();
        assert!(h.is_horosphere());
        let g = Section::real(s, &[0.0, 0.0, 3.0], 1.0).unwrap();
        assert!(!g.is_horosphere());
        assert!(Section::real(s, &[0.0; 3], 1.0).is_err());
    }
}
