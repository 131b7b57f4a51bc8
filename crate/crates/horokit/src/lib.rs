//! Numerical integral geometry on the quadrics `X_{p,q} = {□_{p,q}(x) = 1}`.
//!
//! The crate evaluates the Cauchy–Radon transform
//! `f̂(ζ, p) = ∫_X f(x) / (⟨ζ, x⟩ − p − i0) ω`, its derivatives in `p`, and the
//! horospherical inversion formulas on hyperbolic space and the sphere. It also
//! classifies complex horospheres on `X_{2,n-2}`.
//!
//! Most integrals are two-dimensional (`n = 3`); the algebraic layers work in
//! any dimension.

pub mod chart;
pub mod chebyshev;
pub mod coarea;
pub mod constants;
pub mod cycles;
pub mod error;
pub mod geodesic;
pub mod group;
pub mod horo;
pub mod nullslice;
pub mod par;
pub mod polar;
pub mod pseudo;
pub mod quadratic;
pub mod quadrature;
pub mod richardson;
pub mod section;
pub mod testfn;
pub mod transform;

pub use error::{Error, Result};
pub use quadratic::{QuadraticSpace, C64};
