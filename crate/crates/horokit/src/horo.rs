//! Horospherical Cauchy transform and its inversion on `H^{n−1}` and `S^{n−1}`.
//!
//! On both sheets the horospheres through `x` are `⟨x + τη, u⟩ = 1` with `η`
//! a unit tangent vector at `x` (`τ = 1` on the hyperboloid, `τ = i` on the
//! sphere). Integrating the fundamental form over this cycle and removing `u`
//! from the bracket gives
//! `f(x) = C ∫ L_p Hf(x + τη, p)|_{p=1} [x, η, dη^{n−2}]`
//! with `L_p = (n−2)/p ∂_p^{n−3} + 2 ∂_p^{n−2}`.
//!
//! On the sphere these horospheres touch `S²` at `x` only; their transform is
//! the boundary value from `Ξ₊`, taken along `p = 1 + ε'` and extrapolated.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::constants::{hyperbolic_prefactor, sphere_prefactor};
use crate::cycles::{deformed_cycle, CircleNode, Family};
use crate::error::{check_dim, Error, Result};
use crate::geodesic::{tangent_frame, Sheet};
use crate::polar::Weight;
use crate::quadratic::{det3, QuadraticSpace};
use crate::richardson::{extrapolate, ladder};
use crate::section::{Regularization, Section, TransformValue};
use crate::testfn::TestFunction;
use crate::transform::{moments, Mode, Resolution};

/// Relative tolerance of the class boundaries.
pub const CLASS_TOL: f64 = 1e-10;

/// `Hf` with the analytic stack `∂_p^k Hf`, `k = 0..=n−2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HorosphericalValue {
    pub value: TransformValue,
    pub stack: Vec<TransformValue>,
}

/// Where a complex horosphere of the sphere sits relative to `S^{n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum SphereHorosphereClass {
    /// `0 < Δ(ξ) = Δ(η) < |p|²` after normalizing `p`: no real points.
    Interior,
    /// `Δ(ξ) = Δ(η) = |p|²`: exactly one real point.
    Boundary { point: Vec<f64> },
    /// Real points form a curve (or `p = 0`).
    Exterior,
}

/// `(ζ/p, 1)` with `|ζ|` unchanged in ratio; `None` when `p = 0`.
fn normalized(s: &Section) -> Option<(Vec<Complex64>, Complex64)> {
    let p = s.p();
    if p == Complex64::new(0.0, 0.0) {
        return None;
    }
    Some((s.zeta().iter().map(|z| z / p).collect(), Complex64::new(1.0, 0.0)))
}

fn require_horosphere(s: &Section) -> Result<()> {
    if !s.is_horosphere() {
        return Err(Error::Precondition(format!("section is not a horosphere: □ζ = {}", s.box_zeta())));
    }
    Ok(())
}

/// Classifies an isotropic section of the sphere.
pub fn classify_sphere_horosphere(s: &Section) -> Result<SphereHorosphereClass> {
    if s.space().q() != 0 {
        return Err(Error::Unsupported("sphere classification on an indefinite space".into()));
    }
    require_horosphere(s)?;
    let Some((z, _)) = normalized(s) else {
        return Ok(SphereHorosphereClass::Exterior);
    };
    let d: f64 = z.iter().map(|v| v.re * v.re).sum();
    if (d - 1.0).abs() <= CLASS_TOL * d.max(1.0) {
        let point: Vec<f64> = z.iter().map(|v| v.re / d.sqrt()).collect();
        Ok(SphereHorosphereClass::Boundary { point })
    } else if d < 1.0 {
        Ok(SphereHorosphereClass::Interior)
    } else {
        Ok(SphereHorosphereClass::Exterior)
    }
}

/// Settings for horospherical transforms and inversions.
#[derive(Clone, Debug, PartialEq)]
pub struct HoroOpts {
    /// `Auto` chooses per section: pv-delta on the hyperboloid, plain
    /// quadrature inside `Ξ₊`, the `p` shift ladder on `∂Ξ₊`.
    pub mode: Mode,
    /// First rung and depth of the ladder `p = 1 + ε'_k` on `∂Ξ₊`.
    pub shift0: f64,
    pub shift_levels: usize,
    /// Initial trapezoid nodes on the horospherical cycle.
    pub nodes: usize,
    /// Nodes are doubled until the trapezoid error falls below
    /// `cycle_tol` times the L¹ mass of the cycle integrand, or `max_nodes` is hit.
    pub max_nodes: usize,
    pub cycle_tol: f64,
    pub res: Resolution,
}

impl Default for HoroOpts {
    fn default() -> Self {
        Self {
            mode: Mode::Auto,
            shift0: 0.05,
            shift_levels: 7,
            nodes: 32,
            max_nodes: 512,
            cycle_tol: 1e-7,
            res: Resolution::default(),
        }
    }
}

/// `values[(s·W + w)·K + k] = ∂_p^k ∫ f w/(⟨ζ_s,u⟩ − p_s − i0) ω` for `k = 0..K`.
struct Stacks {
    values: Vec<Complex64>,
    error: f64,
    regularization: Regularization,
}

fn to_stacks(raw: Vec<Complex64>, depth: usize) -> Vec<Complex64> {
    // moment order m = k + 1 becomes the k-th derivative: multiply by k!
    raw.chunks(depth)
        .flat_map(|ch| {
            let mut fact = 1.0;
            ch.iter()
                .enumerate()
                .map(move |(k, v)| {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    v * fact
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Derivative stacks for horospheres of one kind, with the boundary-value
/// ladder applied on the sphere when needed.
fn horo_stacks(
    f: &TestFunction,
    sections: &[Section],
    depth: usize,
    weights: &[Weight],
    opts: &HoroOpts,
    focus: Option<&[f64]>,
) -> Result<Stacks> {
    let space = *f.space();
    for s in sections {
        require_horosphere(s)?;
    }
    let on_boundary = if space.q() == 0 && space.n() >= 3 {
        let classes: Vec<SphereHorosphereClass> = sections.iter().map(classify_sphere_horosphere).collect::<Result<_>>()?;
        let boundary = classes.iter().filter(|c| matches!(c, SphereHorosphereClass::Boundary { .. })).count();
        if classes.contains(&SphereHorosphereClass::Exterior) && matches!(opts.mode, Mode::Auto | Mode::Direct) {
            return Err(Error::SingularKernel);
        }
        if boundary != 0 && boundary != sections.len() {
            return Err(Error::Input("mixed boundary and interior horospheres in one request".into()));
        }
        boundary > 0
    } else {
        false
    };
    if on_boundary && matches!(opts.mode, Mode::Auto) {
        if opts.shift_levels < 2 || !(opts.shift0 > 0.0) {
            return Err(Error::Input("shift ladder needs shift0 > 0 and two levels".into()));
        }
        let lad = ladder(opts.shift0, opts.shift_levels);
        let mut levels = Vec::with_capacity(lad.len());
        let mut quad: f64 = 0.0;
        for &e in &lad {
            let shifted: Vec<Section> = sections.iter().map(|s| s.with_p(s.p() * (1.0 + e))).collect();
            let m = moments(f, &shifted, depth, weights, &Mode::Direct, &opts.res, focus)?;
            quad = quad.max(m.error);
            levels.push(to_stacks(m.values, depth));
        }
        let ex = extrapolate(&levels, 2.0);
        return Ok(Stacks {
            values: ex.value,
            error: ex.error + quad,
            regularization: Regularization::EpsExtrapolation { ladder: lad },
        });
    }
    let m = moments(f, sections, depth, weights, &opts.mode, &opts.res, focus)?;
    Ok(Stacks { values: to_stacks(m.values, depth), error: m.error, regularization: m.regularization })
}

/// `Hf(ζ, p)` and `∂_p^k Hf` for `k ≤ n − 2`.
pub fn horo_transform(f: &TestFunction, s: &Section, opts: &HoroOpts) -> Result<HorosphericalValue> {
    let n = s.space().n();
    let depth = n - 1;
    let st = horo_stacks(f, std::slice::from_ref(s), depth, &[Weight::one(n)], opts, None)?;
    let stack: Vec<TransformValue> = st
        .values
        .iter()
        .map(|v| TransformValue::new(*v, st.error, st.regularization.clone()))
        .collect::<Result<_>>()?;
    Ok(HorosphericalValue { value: stack[0].clone(), stack })
}

/// `((n−2)/p) ∂^{n−3} Hf + 2 ∂^{n−2} Hf` from a derivative stack.
pub fn apply_lp(stack: &[Complex64], n: usize, p: Complex64) -> Result<Complex64> {
    if n < 3 {
        return Err(Error::Unsupported("L_p needs n ≥ 3".into()));
    }
    if stack.len() < n - 1 {
        return Err(Error::Input(format!("L_p needs {} derivatives, the stack has {}", n - 1, stack.len())));
    }
    Ok(stack[n - 3] * (n as f64 - 2.0) / p + stack[n - 2] * 2.0)
}

/// Reconstruction with its error estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub value: Complex64,
    pub error_estimate: f64,
}

/// Horospheres `x + τη(α)` through `x` with `dη/dα`.
fn horo_nodes(space: QuadraticSpace, x: &[f64], count: usize) -> Result<Vec<CircleNode>> {
    match Sheet::of(&space)? {
        Sheet::Hyperbolic => deformed_cycle(space, x, Family::Hyperbolic { rho: 1.0 })?.circle_nodes(count),
        Sheet::Sphere => {
            let t = tangent_frame(&space, x)?;
            (0..count)
                .map(|k| {
                    let alpha = TAU * k as f64 / count as f64;
                    let (s, c) = alpha.sin_cos();
                    let eta: Vec<f64> = (0..3).map(|j| c * t[0][j] + s * t[1][j]).collect();
                    let deta: Vec<Complex64> = (0..3).map(|j| Complex64::new(-s * t[0][j] + c * t[1][j], 0.0)).collect();
                    let section = Section::complex(space, x, &eta, Complex64::new(1.0, 0.0))?;
                    Ok(CircleNode { alpha, section, tangent: deta })
                })
                .collect()
        }
    }
}

fn invert(f: &TestFunction, x: &[f64], opts: &HoroOpts, prefactor: Complex64) -> Result<Reconstruction> {
    let space = *f.space();
    check_dim(space.n(), x.len())?;
    if space.n() != 3 {
        return Err(Error::Unsupported("horospherical inversion is implemented for n = 3".into()));
    }
    if opts.nodes < 4 || !opts.nodes.is_multiple_of(2) {
        return Err(Error::Input("the cycle rule needs an even node count ≥ 4".into()));
    }
    if opts.max_nodes < opts.nodes {
        return Err(Error::Input("max_nodes is below the initial node count".into()));
    }
    let xa = [x[0], x[1], x[2]].map(|v| Complex64::new(v, 0.0));
    let tau = if space.q() == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(1.0, 0.0) };
    // integrand and its inner error at the selected nodes of an `count`-point rule
    let sample = |count: usize, stride: usize, offset: usize| -> Result<Vec<(Complex64, f64)>> {
        let nodes: Vec<CircleNode> = horo_nodes(space, x, count)?.into_iter().skip(offset).step_by(stride).collect();
        let per = crate::par::map_indexed(nodes.len(), |k| {
            horo_stacks(f, std::slice::from_ref(&nodes[k].section), space.n() - 1, &[Weight::one(3)], opts, Some(x))
        });
        nodes
            .iter()
            .zip(per)
            .map(|(nd, st)| {
                let st = st?;
                // [x, η, dη] with η = (ζ − x)/τ; the 1/τ factors and ∂ζ = τ∂η cancel up to τ^{-1}
                let z = nd.section.zeta();
                let eta = [0, 1, 2].map(|j| (z[j] - xa[j]) / tau);
                let deta = [nd.tangent[0], nd.tangent[1], nd.tangent[2]];
                let bracket = det3(&xa, &eta, &deta);
                let lp = apply_lp(&st.values, space.n(), Complex64::new(1.0, 0.0))?;
                Ok((lp * bracket, st.error * 3.0 * bracket.norm()))
            })
            .collect()
    };
    let mut count = opts.nodes;
    let mut terms = sample(count, 1, 0)?;
    loop {
        let h = TAU / count as f64;
        let full: Complex64 = terms.iter().map(|t| t.0).sum::<Complex64>() * h;
        let half: Complex64 = terms.iter().step_by(2).map(|t| t.0).sum::<Complex64>() * (2.0 * h);
        let mass: f64 = terms.iter().map(|t| t.0.norm()).sum::<f64>() * h;
        let inner: f64 = terms.iter().map(|t| t.1).sum::<f64>() * h;
        let trap = (full - half).norm();
        if trap <= opts.cycle_tol * mass || 2 * count > opts.max_nodes {
            return Ok(Reconstruction { value: full * prefactor, error_estimate: (trap + inner) * prefactor.norm() });
        }
        // the doubled rule keeps the old nodes at even positions
        let odd = sample(2 * count, 2, 1)?;
        terms = terms.into_iter().zip(odd).flat_map(|(a, b)| [a, b]).collect();
        count *= 2;
    }
}

/// `f(x)` from real horospheres on the upper sheet of `X_{1,2}`.
pub fn invert_hyperbolic(f: &TestFunction, x: &[f64], opts: &HoroOpts) -> Result<Reconstruction> {
    if Sheet::of(f.space())? != Sheet::Hyperbolic {
        return Err(Error::Unsupported("hyperbolic inversion on a non-hyperbolic space".into()));
    }
    invert(f, x, opts, hyperbolic_prefactor(f.space().n()))
}

/// `f(x)` from boundary values of `Hf` on `∂Ξ₊` of `S²`.
pub fn invert_sphere(f: &TestFunction, x: &[f64], opts: &HoroOpts) -> Result<Reconstruction> {
    if Sheet::of(f.space())? != Sheet::Sphere {
        return Err(Error::Unsupported("sphere inversion on a non-spherical space".into()));
    }
    invert(f, x, opts, Complex64::new(sphere_prefactor(f.space().n()), 0.0))
}

/// Settings for the circle-action projection.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleOpts {
    /// Samples of `θ` for `Hf(e^{iθ}ζ, p₀)`.
    pub theta_nodes: usize,
    /// `p₀ > 1` keeps every `e^{iθ}ζ` inside `Ξ₊`.
    pub p0: f64,
    /// Trapezoid nodes on the horospherical cycle.
    pub cycle_nodes: usize,
    pub res: Resolution,
}

impl Default for CircleOpts {
    fn default() -> Self {
        Self { theta_nodes: 32, p0: 2.0, cycle_nodes: 16, res: Resolution::default() }
    }
}

/// Degree-`ℓ` harmonic component of `f` at each sample point.
///
/// For `ζ = x + iη` the circle action `ζ ↦ e^{iθ}ζ` expands
/// `Hf(e^{iθ}ζ, p₀) = −Σ_k e^{ikθ} p₀^{−k−1} m_k(ζ)` with
/// `m_k = ∫ f ⟨ζ, u⟩^k ω`, and `⟨ζ, u⟩^k` is harmonic of degree `k`. The
/// Fourier coefficient of index `k = ℓ` therefore isolates degree `ℓ`; on it
/// `L_p` acts as multiplication by `2ℓ + 1` at `p = 1`.
pub fn circle_action_projection(f: &TestFunction, degree: usize, points: &[Vec<f64>], opts: &CircleOpts) -> Result<Vec<Reconstruction>> {
    Ok(circle_action_spectrum(f, &[degree], points, opts)?.into_iter().map(|mut v| v.remove(0)).collect())
}

/// As [`circle_action_projection`] for several degrees, sharing the moment
/// sweep; `out[point][k]` belongs to `degrees[k]`.
pub fn circle_action_spectrum(
    f: &TestFunction,
    degrees: &[usize],
    points: &[Vec<f64>],
    opts: &CircleOpts,
) -> Result<Vec<Vec<Reconstruction>>> {
    let space = *f.space();
    if space != QuadraticSpace::sphere(3)? {
        return Err(Error::Unsupported("the circle action is implemented on S²".into()));
    }
    let nt = opts.theta_nodes;
    if let Some(d) = degrees.iter().find(|&&d| nt <= 2 * d + 1) {
        return Err(Error::Input(format!("{nt} θ samples cannot resolve degree {d}")));
    }
    if !(opts.p0 > 1.0) {
        return Err(Error::Input("p0 must exceed 1".into()));
    }
    points
        .iter()
        .map(|x| {
            check_dim(3, x.len())?;
            let nodes = horo_nodes(space, x, opts.cycle_nodes)?;
            let mut sections = Vec::with_capacity(nodes.len() * nt);
            for nd in &nodes {
                for j in 0..nt {
                    let rot = Complex64::from_polar(1.0, TAU * j as f64 / nt as f64);
                    let z: Vec<Complex64> = nd.section.zeta().iter().map(|v| v * rot).collect();
                    sections.push(Section::new(space, z, Complex64::new(opts.p0, 0.0))?);
                }
            }
            let m = moments(f, &sections, 1, &[Weight::one(3)], &Mode::Direct, &opts.res, Some(x))?;
            let h = TAU / nodes.len() as f64;
            Ok(degrees
                .iter()
                .map(|&degree| {
                    let mode = crate::constants::circle_mode_for_degree(degree);
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut acc_half = Complex64::new(0.0, 0.0);
                    for a in 0..nodes.len() {
                        let coef: Complex64 = (0..nt)
                            .map(|j| m.values[a * nt + j] * Complex64::from_polar(1.0, -TAU * (mode * j as i64) as f64 / nt as f64))
                            .sum::<Complex64>()
                            / nt as f64;
                        let m_l = -coef * opts.p0.powi(degree as i32 + 1);
                        acc += m_l;
                        if a % 2 == 0 {
                            acc_half += m_l;
                        }
                    }
                    let scale = (2 * degree + 1) as f64 * sphere_prefactor(3);
                    let value = acc * h * scale;
                    let err = (value - acc_half * 2.0 * h * scale).norm() + m.error * scale * TAU * opts.p0.powi(degree as i32 + 1);
                    Reconstruction { value, error_estimate: err }
                })
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_coefficients() {
        let st = [Complex64::new(3.0, 0.0), Complex64::new(5.0, 0.0), Complex64::new(7.0, 0.0)];
        assert_eq!(apply_lp(&st, 3, Complex64::new(1.0, 0.0)).unwrap(), Complex64::new(13.0, 0.0));
        assert_eq!(apply_lp(&st, 4, Complex64::new(2.0, 0.0)).unwrap(), Complex64::new(19.0, 0.0));
        assert_eq!(apply_lp(&[Complex64::new(0.0, 0.0); 2], 3, Complex64::new(1.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        assert!(apply_lp(&st[..1], 3, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn stated_sphere_classes() {
        let s = QuadraticSpace::sphere(3).unwrap();
        let sec = |a: f64| Section::complex(s, &[a, 0.0, 0.0], &[0.0, a, 0.0], Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(classify_sphere_horosphere(&sec(0.5)).unwrap(), SphereHorosphereClass::Interior);
        assert_eq!(
            classify_sphere_horosphere(&sec(1.0)).unwrap(),
            SphereHorosphereClass::Boundary { point: vec![1.0, 0.0, 0.0] }
        );
        assert_eq!(classify_sphere_horosphere(&sec(1.2)).unwrap(), SphereHorosphereClass::Exterior);
    }
}
