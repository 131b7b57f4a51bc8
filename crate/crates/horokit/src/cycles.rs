//! Cycles of sections through a point and the fundamental form.
//!
//! At the base point `e₁` a cycle is parametrized by `λ ∈ S^{n−2} ⊂ R^{n−1}`:
//!
//! | family      | `ζ(λ)`                  | `p(λ)`        |
//! |-------------|-------------------------|---------------|
//! | geodesic    | `(0, λ)`                | `0`           |
//! | hyperbolic  | `(ρ, λ)`                | `ρ`           |
//! | sphere      | `(iδ, λ)`               | `iδ`          |
//! | pseudo      | `(iδ√□λ, λ)`            | `iδ√□λ`       |
//!
//! with `□λ = λ₂² − λ₃² − …` on `X_{2,n−2}`. A general base point `x` is
//! reached by a group element `g` with `g e₁ = x`, acting on `ζ`.
//!
//! The fundamental form integrated over `X × γ(x)` is
//! `∫_γ ∫_X f(u) [x+u, ζ, dζ^{n−2}] / (⟨ζ, u − x⟩ − i0)^{n−1} ω`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::constants::reconstruction_constant;
use crate::error::{check_dim, Error, Result};
use crate::group::{transport, Mat};
use crate::polar::Weight;
use crate::quadratic::{bracket_eval, det3, BracketSpec, QuadraticSpace};
use crate::richardson::Expansion;
use crate::section::{Regularization, Section, TransformValue};
use crate::testfn::TestFunction;
use crate::transform::{moments, Mode, Resolution};

/// One-parameter deformations of the geodesic cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Geodesic,
    /// Retraction onto the real horospheres of `X_{1,n−1}` (`ρ = 1`).
    Hyperbolic { rho: f64 },
    /// Deformation onto the complex horospheres `x + iη` of the sphere (`δ = 1`).
    Sphere { delta: f64 },
    /// Deformation onto the horospherical cycle of `X_{2,n−2}` (`δ = 1`).
    Pseudo { delta: f64 },
}

impl Family {
    pub fn parameter(self) -> f64 {
        match self {
            Family::Geodesic => 0.0,
            Family::Hyperbolic { rho } => rho,
            Family::Sphere { delta } | Family::Pseudo { delta } => delta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Increasing angle on the parameter circle.
    Standard,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

/// A family of sections through `x` parametrized by `S^{n−2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cycle {
    space: QuadraticSpace,
    base: Vec<f64>,
    g: Mat,
    family: Family,
    orientation: Option<Orientation>,
}

/// One node of the parameter circle (`n = 3`).
#[derive(Clone, Debug, PartialEq)]
pub struct CircleNode {
    pub alpha: f64,
    pub section: Section,
    /// `dζ/dα`.
    pub tangent: Vec<Complex64>,
}

/// The cycle of sections through `x` and the origin.
pub fn geodesic_cycle(space: QuadraticSpace, x: &[f64]) -> Result<Cycle> {
    deformed_cycle(space, x, Family::Geodesic)
}

/// A member of one of the deformation families.
pub fn deformed_cycle(space: QuadraticSpace, x: &[f64], family: Family) -> Result<Cycle> {
    check_dim(space.n(), x.len())?;
    if space.n() < 3 {
        return Err(Error::Unsupported("cycles need n ≥ 3".into()));
    }
    let t = family.parameter();
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Input(format!("deformation parameter {t} outside [0, 1]")));
    }
    let ok = match family {
        Family::Geodesic => true,
        Family::Hyperbolic { .. } => space.p() == 1,
        Family::Sphere { .. } => space.q() == 0,
        Family::Pseudo { .. } => space.p() == 2,
    };
    if !ok {
        return Err(Error::Unsupported(format!("{family:?} is not defined on X_({},{})", space.p(), space.q())));
    }
    let g = transport(&space, x)?;
    Ok(Cycle { space, base: x.to_vec(), g, family, orientation: Some(Orientation::Standard) })
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

impl Cycle {
    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn orientation(&self) -> Option<Orientation> {
        self.orientation
    }

    pub fn with_orientation(mut self, orientation: Option<Orientation>) -> Self {
        self.orientation = orientation;
        self
    }

    /// `□λ` for the pseudo family: the form of signature `(1, n−2)` on `λ`.
    fn box_lambda(&self, lambda: &[f64]) -> f64 {
        lambda.iter().enumerate().map(|(k, v)| if k == 0 { v * v } else { -v * v }).sum()
    }

    /// First coordinate `a(λ)` of `ζ` at the base point, equal to `p`.
    fn head(&self, lambda: &[f64]) -> Complex64 {
        match self.family {
            Family::Geodesic => c(0.0),
            Family::Hyperbolic { rho } => c(rho),
            Family::Sphere { delta } => Complex64::new(0.0, delta),
            Family::Pseudo { delta } => {
                let b = self.box_lambda(lambda);
                // √□λ = i√|□λ| on the band □λ < 0, which makes those sections real
                let root = if b >= 0.0 { c(b.sqrt()) } else { Complex64::new(0.0, (-b).sqrt()) };
                Complex64::new(0.0, delta) * root
            }
        }
    }

    /// Section at `λ ∈ R^{n−1}` (unit length for the Riemannian families).
    pub fn section(&self, lambda: &[f64]) -> Result<Section> {
        check_dim(self.space.n() - 1, lambda.len())?;
        let a = self.head(lambda);
        let mut z = vec![a];
        z.extend(lambda.iter().map(|v| c(*v)));
        Section::new(self.space, self.g.apply_c(&z), a)
    }

    /// `N` equally spaced nodes on the parameter circle (`n = 3`). Pseudo
    /// families are shifted half a step off the branch points of their head.
    pub fn circle_nodes(&self, count: usize) -> Result<Vec<CircleNode>> {
        if self.space.n() != 3 {
            return Err(Error::Unsupported("circle nodes exist for n = 3".into()));
        }
        if count == 0 {
            return Err(Error::Input("need at least one node".into()));
        }
        let shift = if matches!(self.family, Family::Pseudo { .. }) { 0.5 } else { 0.0 };
        (0..count)
            .map(|k| {
                let alpha = TAU * (k as f64 + shift) / count as f64;
                let (s, co) = alpha.sin_cos();
                let section = self.section(&[co, s])?;
                let head_rate = match self.family {
                    Family::Pseudo { delta } if delta != 0.0 => {
                        // d/dα of iδ√(cos²α − sin²α) = iδ√cos 2α
                        let b = (2.0 * alpha).cos();
                        if b.abs() < 1e-12 {
                            return Err(Error::DegenerateSection("tangent undefined on the degenerate boundary".into()));
                        }
                        let root = if b > 0.0 { c(b.sqrt()) } else { Complex64::new(0.0, (-b).sqrt()) };
                        Complex64::new(0.0, delta) * c(-(2.0 * alpha).sin()) / root
                    }
                    _ => c(0.0),
                };
                let tangent = self.g.apply_c(&[head_rate, c(-s), c(co)]);
                Ok(CircleNode { alpha, section, tangent })
            })
            .collect()
    }

    /// Largest `|⟨ζ, x⟩ − p|` over the given parameter points.
    pub fn containment_defect(&self, lambdas: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for l in lambdas {
            let s = self.section(l)?;
            worst = worst.max(s.defect(&self.base).norm());
        }
        Ok(worst)
    }
}

/// Settings for [`fundamental_form_integral`].
#[derive(Clone, Debug, PartialEq)]
pub struct FormOpts {
    /// Trapezoid nodes on the parameter circle.
    pub nodes: usize,
    /// `Auto` picks pv-delta for real cycles and an `ε` ladder otherwise.
    pub mode: Mode,
    pub res: Resolution,
}

impl Default for FormOpts {
    fn default() -> Self {
        Self { nodes: 32, mode: Mode::Auto, res: Resolution::default() }
    }
}

/// The `ε` ladder used for cycles of complex sections. The kernel pole
/// never pinches a real point, so the error expands in integer powers.
pub fn complex_cycle_mode() -> Mode {
    Mode::EpsExtrapolation { eps0: 0.05, levels: 8, expansion: Expansion::Integer }
}

/// Value of the form integral, split by the two bracket terms.
#[derive(Clone, Debug, PartialEq)]
pub struct FormValue {
    pub total: TransformValue,
    /// Contribution of `[x, ζ, dζ]`; reconstructs the even part of `f`.
    pub x_term: Complex64,
    /// Contribution of `[u, ζ, dζ]`; reconstructs the odd part of `f`.
    pub u_term: Complex64,
    /// `total / c` with the realized constant.
    pub reconstruction: Complex64,
}

/// `∫_{X×γ} κ_x[f]` by inner integration over `X` and a trapezoid rule on the cycle.
pub fn fundamental_form_integral(f: &TestFunction, cycle: &Cycle, opts: &FormOpts) -> Result<FormValue> {
    let orientation = cycle
        .orientation
        .ok_or_else(|| Error::Precondition("cycle orientation is unset; the sign of c depends on it".into()))?;
    if *f.space() != cycle.space {
        return Err(Error::Input("test function and cycle live on different spaces".into()));
    }
    let n = cycle.space.n();
    if n != 3 {
        return Err(Error::Unsupported("the form integral is implemented for n = 3".into()));
    }
    if opts.nodes < 4 || !opts.nodes.is_multiple_of(2) {
        return Err(Error::Input("the cycle rule needs an even node count ≥ 4".into()));
    }
    let nodes = cycle.circle_nodes(opts.nodes)?;
    let real = nodes.iter().all(|nd| nd.section.is_real());
    let mode = match (&opts.mode, real) {
        (Mode::Auto, true) => Mode::PvDelta,
        (Mode::Auto, false) => complex_cycle_mode(),
        (m, _) => m.clone(),
    };
    let x = cycle.base.clone();
    let xa = [c(x[0]), c(x[1]), c(x[2])];
    let per_node = crate::par::map_indexed(nodes.len(), |k| -> Result<(Complex64, Complex64, f64, Regularization)> {
        let nd = &nodes[k];
        let z = nd.section.zeta();
        let za = [z[0], z[1], z[2]];
        let ta = [nd.tangent[0], nd.tangent[1], nd.tangent[2]];
        let lin: Vec<Complex64> = (0..3)
            .map(|j| {
                let mut e = [c(0.0); 3];
                e[j] = c(1.0);
                det3(&e, &za, &ta)
            })
            .collect();
        let weights = [
            Weight { constant: det3(&xa, &za, &ta), linear: vec![c(0.0); 3] },
            Weight { constant: c(0.0), linear: lin },
        ];
        let m = moments(f, std::slice::from_ref(&nd.section), n - 1, &weights, &mode, &opts.res, Some(&x))?;
        // order n − 1 entries of the two weights
        Ok((m.values[n - 2], m.values[2 * (n - 1) - 1], m.error, m.regularization))
    });
    let per_node: Vec<_> = per_node.into_iter().collect::<Result<_>>()?;
    let h = TAU / opts.nodes as f64;
    let sum = |stride: usize| -> (Complex64, Complex64) {
        let mut a = c(0.0);
        let mut b = c(0.0);
        for (xt, ut, _, _) in per_node.iter().step_by(stride) {
            a += xt;
            b += ut;
        }
        let w = h * stride as f64 * orientation.sign();
        (a * w, b * w)
    };
    let (x_term, u_term) = sum(1);
    let (x_half, u_half) = sum(2);
    let inner: f64 = per_node.iter().map(|t| t.2).sum::<f64>() * h;
    let outer = (x_term + u_term - x_half - u_half).norm();
    let total = x_term + u_term;
    let regularization = per_node[0].3.clone();
    let c_n = reconstruction_constant(n);
    Ok(FormValue {
        total: TransformValue::new(total, inner + outer, regularization)?,
        x_term,
        u_term,
        reconstruction: total / c_n,
    })
}

/// Form integrals along several members of a family and their spread.
#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceReport {
    pub values: Vec<FormValue>,
    pub max_deviation: f64,
    pub combined_error: f64,
}

/// Evaluates the form along each cycle and reports `max |I_i − I_j|`.
pub fn cycle_independence_check(f: &TestFunction, x: &[f64], families: &[Family], opts: &FormOpts) -> Result<IndependenceReport> {
    let values: Vec<FormValue> = families
        .iter()
        .map(|fam| fundamental_form_integral(f, &deformed_cycle(*f.space(), x, *fam)?, opts))
        .collect::<Result<_>>()?;
    let mut dev: f64 = 0.0;
    for a in &values {
        for b in &values {
            dev = dev.max((a.total.value - b.total.value).norm());
        }
    }
    let combined = values.iter().map(|v| v.total.error_estimate).fold(0.0, f64::max) * 2.0;
    Ok(IndependenceReport { values, max_deviation: dev, combined_error: combined })
}

/// `[λ, ζ, dζ^{n−2}] / ⟨λ, ζ⟩` evaluated on `frame`.
pub fn residue_form(space: &QuadraticSpace, zeta: &[Complex64], lambda: &[Complex64], frame: &[Vec<Complex64>]) -> Result<Complex64> {
    let n = space.n();
    check_dim(n, zeta.len())?;
    check_dim(n, lambda.len())?;
    let pair = space.pair_unchecked(lambda, zeta);
    if pair.norm() <= 1e-14 * norm(lambda) * norm(zeta) {
        return Err(Error::Input("⟨λ, ζ⟩ vanishes".into()));
    }
    let spec = BracketSpec::new(n, vec![lambda.to_vec(), zeta.to_vec()], n - 2)?;
    Ok(bracket_eval(&spec, frame)? / pair)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|R(λ₁) − R(λ₂)| / max |R|` for the residue form above. Requires `□ζ = 0` and
/// a frame tangent to the cone (`⟨ζ, v⟩ = 0`).
pub fn lambda_independence_check(
    space: &QuadraticSpace,
    zeta: &[Complex64],
    lambda1: &[Complex64],
    lambda2: &[Complex64],
    frame: &[Vec<Complex64>],
) -> Result<f64> {
    let scale = norm(zeta).powi(2);
    if space.pair_unchecked(zeta, zeta).norm() > crate::section::ISOTROPY_TOL * scale {
        return Err(Error::Precondition("ζ is not isotropic".into()));
    }
    for v in frame {
        if space.pair_unchecked(zeta, v).norm() > 1e-10 * norm(zeta) * norm(v) {
            return Err(Error::Precondition("frame is not tangent to the cone at ζ".into()));
        }
    }
    let a = residue_form(space, zeta, lambda1, frame)?;
    let b = residue_form(space, zeta, lambda2, frame)?;
    let s = a.norm().max(b.norm());
    Ok(if s == 0.0 { 0.0 } else { (a - b).norm() / s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stated_geodesic_parametrization() {
        let s = QuadraticSpace::hyperbolic(3).unwrap();
        let cyc = geodesic_cycle(s, &[1.0, 0.0, 0.0]).unwrap();
        let sec = cyc.section(&[0.6, 0.8]).unwrap();
        assert_eq!(sec.xi(), vec![0.0, 0.6, 0.8]);
        assert_eq!(sec.p(), c(0.0));
    }

    #[test]
    fn retraction_ends_on_the_cone() {
        let s = QuadraticSpace::hyperbolic(4).unwrap();
        let x = [(1.0f64 + 0.25 + 0.5625).sqrt(), 0.5, 0.0, 0.75];
        let cyc = deformed_cycle(s, &x, Family::Hyperbolic { rho: 1.0 }).unwrap();
        let sec = cyc.section(&[0.0, 0.6, 0.8]).unwrap();
        assert!(sec.is_horosphere());
        assert!(sec.defect(&x).norm() < 1e-12);
    }

    #[test]
    fn tangent_matches_difference_quotient() {
        let s = QuadraticSpace::pseudo(3).unwrap();
        let cyc = deformed_cycle(s, &[1.0, 0.0, 0.0], Family::Pseudo { delta: 0.7 }).unwrap();
        let nodes = cyc.circle_nodes(16).unwrap();
        let nd = &nodes[1];
        let h = 1e-6;
        let up = cyc.section(&[(nd.alpha + h).cos(), (nd.alpha + h).sin()]).unwrap();
        let dn = cyc.section(&[(nd.alpha - h).cos(), (nd.alpha - h).sin()]).unwrap();
        for k in 0..3 {
            let fd = (up.zeta()[k] - dn.zeta()[k]) / (2.0 * h);
            assert!((fd - nd.tangent[k]).norm() < 1e-7, "{k}: {fd} vs {}", nd.tangent[k]);
        }
    }

    #[test]
    fn unset_orientation_is_rejected() {
        let s = QuadraticSpace::sphere(3).unwrap();
        let cyc = geodesic_cycle(s, &[0.0, 0.0, 1.0]).unwrap().with_orientation(None);
        let f = TestFunction::zero(s);
        assert!(matches!(fundamental_form_integral(&f, &cyc, &FormOpts::default()), Err(Error::Precondition(_))));
    }
}
