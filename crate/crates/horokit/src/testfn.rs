//! Smooth test functions on the quadrics: bumps, modulated bumps, and real
//! spherical harmonics on `S²`.

use crate::error::{check_dim, Error, Result};
use crate::geodesic::Sheet;
use crate::group::Mat;
use crate::quadratic::QuadraticSpace;

/// How the bump measures distance from its center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// Invariant chordal distance: `2 − 2⟨u, c⟩` on the sphere,
    /// `2⟨u, c⟩ − 2` on hyperbolic space (same sheet only).
    Invariant,
    /// Euclidean distance in the ambient space (used on `X_{2,n-2}`).
    Euclidean,
}

/// `exp(−1/(1 − s²))` for `s < 1`, zero otherwise.
#[inline]
pub fn mollifier(s2: f64) -> f64 {
    if s2 < 1.0 {
        (-1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub profile: Profile,
}

impl Bump {
    fn s2(&self, space: &QuadraticSpace, u: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        match self.profile {
            Profile::Euclidean => {
                self.center.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / r2
            }
            Profile::Invariant => {
                let c = space.pair_rr(u, &self.center);
                if space.q() == 0 {
                    (2.0 - 2.0 * c) / r2
                } else if c >= 1.0 {
                    (2.0 * c - 2.0) / r2
                } else if c > 0.0 {
                    // numerically on the same sheet, inside round-off of the center
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn eval(&self, space: &QuadraticSpace, u: &[f64]) -> f64 {
        mollifier(self.s2(space, u))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    Bump(Bump),
    /// `bump(u) · (v · u)` with the Euclidean dot product.
    Modulated { bump: Bump, direction: Vec<f64> },
    /// Real orthonormal spherical harmonic `Y_ℓ^m` on `S²`.
    Harmonic { degree: usize, order: i64 },
    Constant,
}

/// Where an atom can be nonzero.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    /// Closed geodesic ball on a Riemannian sheet.
    Ball { center: Vec<f64>, radius: f64 },
    /// Euclidean ball in the ambient space.
    EuclideanBall { center: Vec<f64>, radius: f64 },
    Global,
}

impl Atom {
    pub fn eval(&self, space: &QuadraticSpace, u: &[f64]) -> f64 {
        match self {
            Atom::Bump(b) => b.eval(space, u),
            Atom::Modulated { bump, direction } => {
                let v = bump.eval(space, u);
                if v == 0.0 {
                    0.0
                } else {
                    v * direction.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
                }
            }
            Atom::Harmonic { degree, order } => real_harmonic(*degree, *order, u),
            Atom::Constant => 1.0,
        }
    }

    pub fn support(&self, space: &QuadraticSpace) -> Support {
        let ball = |b: &Bump| match b.profile {
            Profile::Euclidean => Support::EuclideanBall { center: b.center.clone(), radius: b.radius },
            Profile::Invariant => match Sheet::of(space) {
                Ok(sheet) => Support::Ball { center: b.center.clone(), radius: sheet.geodesic_radius(b.radius) },
                Err(_) => Support::Global,
            },
        };
        match self {
            Atom::Bump(b) | Atom::Modulated { bump: b, .. } => ball(b),
            Atom::Harmonic { .. } | Atom::Constant => Support::Global,
        }
    }
}

/// Finite linear combination `Σ c_k a_k` of atoms on a fixed space.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    space: QuadraticSpace,
    terms: Vec<(f64, Atom)>,
}

impl TestFunction {
    pub fn new(space: QuadraticSpace, terms: Vec<(f64, Atom)>) -> Result<Self> {
        for (c, atom) in &terms {
            if !c.is_finite() {
                return Err(Error::Input("non-finite coefficient".into()));
            }
            validate(&space, atom)?;
        }
        Ok(Self { space, terms })
    }

    pub fn zero(space: QuadraticSpace) -> Self {
        Self { space, terms: Vec::new() }
    }

    /// Single invariant bump.
    pub fn bump(space: QuadraticSpace, center: Vec<f64>, radius: f64) -> Result<Self> {
        let profile = if space.p() >= 2 && space.q() >= 1 { Profile::Euclidean } else { Profile::Invariant };
        Self::new(space, vec![(1.0, Atom::Bump(Bump { center, radius, profile }))])
    }

    pub fn harmonic(degree: usize, order: i64) -> Result<Self> {
        Self::new(QuadraticSpace::sphere(3)?, vec![(1.0, Atom::Harmonic { degree, order })])
    }

    pub fn constant(space: QuadraticSpace, value: f64) -> Result<Self> {
        Self::new(space, vec![(value, Atom::Constant)])
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn terms(&self) -> &[(f64, Atom)] {
        &self.terms
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|(c, a)| c * a.eval(&self.space, u)).sum()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &TestFunction, b: f64) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::Input("test functions live on different spaces".into()));
        }
        let mut terms: Vec<(f64, Atom)> = self.terms.iter().map(|(c, t)| (a * c, t.clone())).collect();
        terms.extend(other.terms.iter().map(|(c, t)| (b * c, t.clone())));
        Ok(Self { space: self.space, terms })
    }

    /// `u ↦ f(−u)`.
    pub fn reflected(&self) -> Self {
        let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        let terms = self
            .terms
            .iter()
            .map(|(c, atom)| match atom {
                Atom::Bump(b) => (*c, Atom::Bump(Bump { center: neg(&b.center), ..b.clone() })),
                Atom::Modulated { bump, direction } => (
                    *c,
                    Atom::Modulated {
                        bump: Bump { center: neg(&bump.center), ..bump.clone() },
                        direction: neg(direction),
                    },
                ),
                Atom::Harmonic { degree, .. } => {
                    (if degree % 2 == 0 { *c } else { -*c }, atom.clone())
                }
                Atom::Constant => (*c, Atom::Constant),
            })
            .collect();
        Self { space: self.space, terms }
    }

    /// `u ↦ f(g u)` for `g` in the group of the form.
    pub fn composed(&self, g: &Mat) -> Result<Self> {
        check_dim(self.space.n(), g.n())?;
        let ginv = g.q_inverse(&self.space);
        let mut terms = Vec::with_capacity(self.terms.len());
        for (c, atom) in &self.terms {
            let moved = match atom {
                Atom::Bump(b) => Atom::Bump(Bump { center: ginv.apply(&b.center), ..b.clone() }),
                Atom::Modulated { bump, direction } => {
                    // v·(g u) = (gᵀ v)·u
                    let n = g.n();
                    let gt: Vec<f64> = (0..n).map(|j| (0..n).map(|i| g.get(i, j) * direction[i]).sum()).collect();
                    Atom::Modulated { bump: Bump { center: ginv.apply(&bump.center), ..bump.clone() }, direction: gt }
                }
                Atom::Constant => Atom::Constant,
                Atom::Harmonic { .. } => {
                    return Err(Error::Unsupported("composition of harmonics with group elements".into()))
                }
            };
            terms.push((*c, moved));
        }
        Ok(Self { space: self.space, terms })
    }
}

fn validate(space: &QuadraticSpace, atom: &Atom) -> Result<()> {
    let check_bump = |b: &Bump| -> Result<()> {
        check_dim(space.n(), b.center.len())?;
        if !(b.radius > 0.0 && b.radius.is_finite()) {
            return Err(Error::Input("bump radius must be positive".into()));
        }
        let q = space.pair_rr(&b.center, &b.center);
        if (q - 1.0).abs() > 1e-9 * (1.0 + b.center.iter().map(|v| v * v).sum::<f64>()) {
            return Err(Error::Input(format!("bump center is off the quadric (□ = {q})")));
        }
        if b.profile == Profile::Invariant && space.q() == 0 && b.radius >= 2.0 {
            return Err(Error::Input("invariant bump radius on the sphere must be < 2".into()));
        }
        Ok(())
    };
    match atom {
        Atom::Bump(b) => check_bump(b),
        Atom::Modulated { bump, direction } => {
            check_bump(bump)?;
            check_dim(space.n(), direction.len())
        }
        Atom::Harmonic { degree, order } => {
            if space.q() != 0 || space.n() != 3 {
                return Err(Error::Input("harmonics are defined on S² only".into()));
            }
            if order.unsigned_abs() as usize > *degree {
                return Err(Error::Input("harmonic order exceeds degree".into()));
            }
            Ok(())
        }
        Atom::Constant => {
            if space.q() != 0 {
                return Err(Error::Input("constants are not compactly supported off the sphere".into()));
            }
            Ok(())
        }
    }
}

/// Real orthonormal spherical harmonic on `S²`, written as a polynomial in
/// `u` so that it stays smooth at the poles:
/// `N P_ℓ^{(m)}(u_3) Re/Im (u_1 + i u_2)^{|m|}`.
pub fn real_harmonic(degree: usize, order: i64, u: &[f64]) -> f64 {
    let l = degree;
    let m = order.unsigned_abs() as usize;
    let z = u[2];
    // Q_l^m = d^m P_l / dz^m via the associated-Legendre recurrence without sin^m.
    let mut q_mm = 1.0;
    for k in 1..=m {
        q_mm *= (2 * k - 1) as f64;
    }
    let q = if l == m {
        q_mm
    } else {
        let mut a = q_mm;
        let mut b = z * (2 * m + 1) as f64 * q_mm;
        for ll in (m + 2)..=l {
            let c = (z * (2 * ll - 1) as f64 * b - (ll + m - 1) as f64 * a) / (ll - m) as f64;
            a = b;
            b = c;
        }
        b
    };
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..m {
        let (r, i) = (re * u[0] - im * u[1], re * u[1] + im * u[0]);
        re = r;
        im = i;
    }
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    let mut norm = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * ratio).sqrt();
    if m != 0 {
        norm *= std::f64::consts::SQRT_2;
    }
    let angular = match order.cmp(&0) {
        std::cmp::Ordering::Less => im,
        _ => re,
    };
    norm * q * angular
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let s = QuadraticSpace::sphere(3).unwrap();
        let f = TestFunction::bump(s, vec![0.0, 0.0, 1.0], 0.5).unwrap();
        assert!((f.eval(&[0.0, 0.0, 1.0]) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(f.eval(&[1.0, 0.0, 0.0]), 0.0);
        let h = QuadraticSpace::hyperbolic(3).unwrap();
        let g = TestFunction::bump(h, vec![1.0, 0.0, 0.0], 0.5).unwrap();
        assert_eq!(g.eval(&[-1.0, 0.0, 0.0]), 0.0);
        assert!(TestFunction::bump(h, vec![1.0, 1.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn harmonics_match_closed_forms() {
        let pi = std::f64::consts::PI;
        let u = [0.36, 0.48, 0.8];
        let y10 = (3.0 / (4.0 * pi)).sqrt() * u[2];
        assert!((real_harmonic(1, 0, &u) - y10).abs() < 1e-15);
        let y11 = (3.0 / (4.0 * pi)).sqrt() * u[0];
        assert!((real_harmonic(1, 1, &u) - y11).abs() < 1e-15);
        let y1m1 = (3.0 / (4.0 * pi)).sqrt() * u[1];
        assert!((real_harmonic(1, -1, &u) - y1m1).abs() < 1e-15);
        let y20 = (5.0 / (16.0 * pi)).sqrt() * (3.0 * u[2] * u[2] - 1.0);
        assert!((real_harmonic(2, 0, &u) - y20).abs() < 1e-14);
        let y22 = (15.0 / (16.0 * pi)).sqrt() * (u[0] * u[0] - u[1] * u[1]);
        assert!((real_harmonic(2, 2, &u) - y22).abs() < 1e-14);
    }

    #[test]
    fn reflection_flips_odd_degrees() {
        let f = TestFunction::harmonic(3, 1).unwrap();
        let u = [0.6, 0.0, 0.8];
        let v = [-0.6, 0.0, -0.8];
        assert!((f.reflected().eval(&u) - f.eval(&v)).abs() < 1e-15);
    }
}
