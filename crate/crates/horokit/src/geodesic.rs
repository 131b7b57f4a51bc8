//! Riemannian helpers on the sphere and on the upper sheet of `X_{1,n-1}`.

use crate::error::{Error, Result};
use crate::group::transport;
use crate::quadratic::QuadraticSpace;

/// Constant-curvature sheet: `σ = +1` on the sphere, `σ = −1` on hyperbolic space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sheet {
    Sphere,
    Hyperbolic,
}

impl Sheet {
    pub fn of(space: &QuadraticSpace) -> Result<Self> {
        match (space.p(), space.q()) {
            (_, 0) => Ok(Sheet::Sphere),
            (1, _) => Ok(Sheet::Hyperbolic),
            _ => Err(Error::Unsupported("no Riemannian sheet for this signature".into())),
        }
    }

    pub fn sigma(self) -> f64 {
        match self {
            Sheet::Sphere => 1.0,
            Sheet::Hyperbolic => -1.0,
        }
    }

    /// `(C(r), S(r))`: `(cos r, sin r)` or `(cosh r, sinh r)`.
    #[inline]
    pub fn cs(self, r: f64) -> (f64, f64) {
        match self {
            Sheet::Sphere => (r.cos(), r.sin()),
            Sheet::Hyperbolic => (r.cosh(), r.sinh()),
        }
    }

    /// Geodesic distance from the pairing `⟨u, v⟩` of two points.
    pub fn distance_from_pairing(self, c: f64) -> f64 {
        match self {
            Sheet::Sphere => c.clamp(-1.0, 1.0).acos(),
            Sheet::Hyperbolic => c.max(1.0).acosh(),
        }
    }

    /// Geodesic radius of a ball with invariant chordal radius `rho`.
    pub fn geodesic_radius(self, rho: f64) -> f64 {
        match self {
            Sheet::Sphere => {
                if rho >= 2.0 {
                    std::f64::consts::PI
                } else {
                    2.0 * (0.5 * rho).asin()
                }
            }
            Sheet::Hyperbolic => 2.0 * (0.5 * rho).asinh(),
        }
    }

    /// Largest useful radius of a polar chart.
    pub fn max_radius(self) -> f64 {
        match self {
            Sheet::Sphere => std::f64::consts::PI,
            Sheet::Hyperbolic => f64::INFINITY,
        }
    }
}

/// Orthonormal tangent frame at `c`: `⟨t_i, c⟩ = 0` and `σ⟨t_i, t_j⟩ = δ_ij`.
pub fn tangent_frame(space: &QuadraticSpace, c: &[f64]) -> Result<Vec<Vec<f64>>> {
    let g = transport(space, c)?;
    Ok((1..space.n()).map(|k| g.col(k)).collect())
}

/// Range of the linear function `u ↦ ⟨ξ, u⟩` over the closed geodesic ball
/// `B(center, radius)`.
pub fn t_range_on_ball(space: &QuadraticSpace, xi: &[f64], center: &[f64], radius: f64) -> Result<(f64, f64)> {
    let sheet = Sheet::of(space)?;
    let radius = radius.min(sheet.max_radius());
    let a = space.pair_rr(xi, center);
    let b2 = sheet.sigma() * (space.pair_rr(xi, xi) - a * a);
    let b = b2.max(0.0).sqrt();
    let extreme = |beta: f64, want_max: bool| -> f64 {
        let h = |r: f64| {
            let (c, s) = sheet.cs(r);
            a * c + beta * s
        };
        let mut cands = vec![h(0.0), h(radius)];
        match sheet {
            Sheet::Sphere => {
                let r = beta.atan2(a);
                for r in [r, r + std::f64::consts::PI, r - std::f64::consts::PI] {
                    if r > 0.0 && r < radius {
                        cands.push(h(r));
                    }
                }
            }
            Sheet::Hyperbolic => {
                if a != 0.0 && (beta / a).abs() < 1.0 {
                    let r = (-beta / a).atanh();
                    if r > 0.0 && r < radius {
                        cands.push(h(r));
                    }
                }
            }
        }
        if want_max {
            cands.into_iter().fold(f64::NEG_INFINITY, f64::max)
        } else {
            cands.into_iter().fold(f64::INFINITY, f64::min)
        }
    };
    Ok((extreme(-b, false), extreme(b, true)))
}
