//! Principal-value engine for real sections on `S²` and `H²` by co-area slicing.
//!
//! For `t(u) = ⟨ξ, u⟩` the integral `∫ F(u) K(t(u) − p) ω` equals
//! `∫ K(τ − p) g(τ) dτ` with the pushforward density
//! `g(τ) = ∫_{t = τ} F ω/|dt|`. Each level set is a circle, a hypercycle, or a
//! horocycle with a constant Leray density, and the support of a bump on it is
//! a single interval obtained from a quadratic. `g` is interpolated on
//! Chebyshev points and its Cauchy transform is taken in closed form, which
//! realizes `(t − i0)^{-m}` exactly: principal value plus the `iπ δ` layer.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::chebyshev::{lobatto, Cheb};
use crate::error::{Error, Result};
use crate::geodesic::{t_range_on_ball, tangent_frame, Sheet};
use crate::polar::Weight;
use crate::quadratic::QuadraticSpace;
use crate::quadrature::{adaptive, AdaptiveOpts};
use crate::section::Section;
use crate::testfn::{Atom, Support, TestFunction};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoareaOpts {
    /// Initial Chebyshev points for the pushforward density; doubled until converged.
    pub cheb_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub slice_rel_tol: f64,
}

impl Default for CoareaOpts {
    fn default() -> Self {
        Self { cheb_nodes: 65, max_nodes: 2049, rel_tol: 1e-11, abs_tol: 1e-14, slice_rel_tol: 1e-13 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoareaOutput {
    /// Entry `w * orders + (m − 1)`.
    pub values: Vec<Complex64>,
    pub error: f64,
}

/// Level curve `τ = ⟨ξ, u⟩` on the sheet, with parameter range and density.
enum Curve {
    /// `u = A + B cos θ + C sin θ`
    Circle { a: [f64; 3], b: [f64; 3], c: [f64; 3] },
    /// `u = A + B cosh θ + C sinh θ`
    Hypercycle { a: [f64; 3], b: [f64; 3], c: [f64; 3] },
    /// `u = A + B y + C y²`
    Horocycle { a: [f64; 3], b: [f64; 3], c: [f64; 3] },
}

impl Curve {
    fn point(&self, t: f64) -> [f64; 3] {
        let (a, b, c, x, y) = match self {
            Curve::Circle { a, b, c } => (a, b, c, t.cos(), t.sin()),
            Curve::Hypercycle { a, b, c } => (a, b, c, t.cosh(), t.sinh()),
            Curve::Horocycle { a, b, c } => (a, b, c, t, t * t),
        };
        [a[0] + x * b[0] + y * c[0], a[1] + x * b[1] + y * c[1], a[2] + x * b[2] + y * c[2]]
    }

    /// Parameter interval where `σ(⟨u, center⟩ − threshold) ≥ 0`, or the whole curve.
    fn interval(&self, space: &QuadraticSpace, ball: Option<(&[f64], f64, f64)>) -> Option<(f64, f64)> {
        let Some((center, threshold, sigma)) = ball else {
            return match self {
                Curve::Circle { .. } => Some((0.0, TAU)),
                _ => None,
            };
        };
        let (a, b, c) = match self {
            Curve::Circle { a, b, c } | Curve::Hypercycle { a, b, c } | Curve::Horocycle { a, b, c } => (a, b, c),
        };
        // σ(α + β X + γ Y − T) ≥ 0
        let al = sigma * (space.pair_rr(a, center) - threshold);
        let be = sigma * space.pair_rr(b, center);
        let ga = sigma * space.pair_rr(c, center);
        match self {
            Curve::Circle { .. } => {
                let r = be.hypot(ga);
                if r == 0.0 {
                    return if al >= 0.0 { Some((0.0, TAU)) } else { None };
                }
                let k = -al / r;
                if k <= -1.0 {
                    Some((0.0, TAU))
                } else if k >= 1.0 {
                    None
                } else {
                    let c0 = ga.atan2(be);
                    let h = k.acos();
                    Some((c0 - h, c0 + h))
                }
            }
            Curve::Hypercycle { .. } => {
                // w = e^θ: ((β+γ)/2) w² + α w + (β−γ)/2 ≥ 0 with a negative leading term
                let (qa, qb, qc) = (0.5 * (be + ga), al, 0.5 * (be - ga));
                let roots = real_roots(qa, qb, qc)?;
                let lo = roots.0.max(1e-300);
                if roots.1 <= lo {
                    return None;
                }
                Some((lo.ln(), roots.1.ln()))
            }
            Curve::Horocycle { .. } => {
                let roots = real_roots(ga, be, al)?;
                Some(roots)
            }
        }
    }
}

fn real_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if a == 0.0 {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some((r1.min(r2), r1.max(r2)))
}

fn arr(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn comb(s: &[(f64, &[f64])]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (c, v) in s {
        for k in 0..3 {
            out[k] += c * v[k];
        }
    }
    out
}

/// Level-set data for `⟨ξ, u⟩ = τ` on the upper sheet or the sphere.
struct Slicer {
    kind: SlicerKind,
}

enum SlicerKind {
    Sphere { e: Vec<f64>, a: Vec<f64>, b: Vec<f64>, norm: f64 },
    Timelike { e0: Vec<f64>, e1: Vec<f64>, e2: Vec<f64>, kappa: f64, sign: f64 },
    Spacelike { e0: Vec<f64>, e1: Vec<f64>, e2: Vec<f64>, kappa: f64 },
    Null { n1: Vec<f64>, n2: Vec<f64>, e: Vec<f64>, sign: f64, det: f64 },
}

impl Slicer {
    fn new(space: &QuadraticSpace, xi: &[f64]) -> Result<Self> {
        let norm2: f64 = xi.iter().map(|v| v * v).sum();
        let q = space.pair_rr(xi, xi);
        let kind = match Sheet::of(space)? {
            Sheet::Sphere => {
                let norm = norm2.sqrt();
                let e: Vec<f64> = xi.iter().map(|v| v / norm).collect();
                let t = tangent_frame(space, &e)?;
                SlicerKind::Sphere { e, a: t[0].clone(), b: t[1].clone(), norm }
            }
            Sheet::Hyperbolic if q > 1e-12 * norm2 => {
                let kappa = q.sqrt();
                let sign = xi[0].signum();
                let e0: Vec<f64> = xi.iter().map(|v| sign * v / kappa).collect();
                let t = tangent_frame(space, &e0)?;
                SlicerKind::Timelike { e0, e1: t[0].clone(), e2: t[1].clone(), kappa, sign }
            }
            Sheet::Hyperbolic if q < -1e-12 * norm2 => {
                let kappa = (-q).sqrt();
                let e2: Vec<f64> = xi.iter().map(|v| v / kappa).collect();
                // e0: timelike unit in e2^⊥, future pointing
                let w = [1.0, 0.0, 0.0];
                let c = space.pair_rr(&w, &e2);
                let mut e0: Vec<f64> = (0..3).map(|k| w[k] + c * e2[k]).collect();
                let n0 = space.pair_rr(&e0, &e0).sqrt();
                e0.iter_mut().for_each(|v| *v /= n0);
                // e1 = J(e0 × e2), normalized
                let cr = crate::quadratic::cross(&arr(&e0), &arr(&e2));
                let mut e1 = vec![cr[0], -cr[1], -cr[2]];
                let n1 = (-space.pair_rr(&e1, &e1)).sqrt();
                e1.iter_mut().for_each(|v| *v /= n1);
                SlicerKind::Spacelike { e0, e1, e2, kappa }
            }
            Sheet::Hyperbolic => {
                if xi[0] == 0.0 {
                    return Err(Error::DegenerateSection("null normal with vanishing time component".into()));
                }
                let sign = xi[0].signum();
                let n1: Vec<f64> = xi.iter().map(|v| sign * v).collect();
                let s = 1.0 / (2.0 * n1[0] * n1[0]);
                let n2 = vec![s * n1[0], -s * n1[1], -s * n1[2]];
                let ns = n1[1].hypot(n1[2]);
                let e = vec![0.0, -n1[2] / ns, n1[1] / ns];
                let det = crate::quadratic::det3(&arr(&n1), &arr(&n2), &arr(&e)).abs();
                SlicerKind::Null { n1, n2, e, sign, det }
            }
        };
        Ok(Self { kind })
    }

    /// Values of `τ` with a nonempty level set. At a finite end the level set
    /// collapses to a point and `g` jumps, so interpolation must stop there.
    fn tau_range(&self) -> (f64, f64) {
        match &self.kind {
            SlicerKind::Sphere { norm, .. } => (-norm, *norm),
            SlicerKind::Timelike { kappa, sign, .. } if *sign > 0.0 => (*kappa, f64::INFINITY),
            SlicerKind::Timelike { kappa, .. } => (f64::NEG_INFINITY, -kappa),
            SlicerKind::Spacelike { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            SlicerKind::Null { sign, .. } if *sign > 0.0 => (0.0, f64::INFINITY),
            SlicerKind::Null { .. } => (f64::NEG_INFINITY, 0.0),
        }
    }

    /// Level curve and Leray density at `τ`, or `None` if the level set is empty.
    fn curve(&self, tau: f64) -> Option<(Curve, f64)> {
        match &self.kind {
            SlicerKind::Sphere { e, a, b, norm } => {
                let h = tau / norm;
                if h.abs() > 1.0 + 1e-12 {
                    return None;
                }
                let h = h.clamp(-1.0, 1.0);
                let rad = (1.0 - h * h).sqrt();
                let c = Curve::Circle { a: comb(&[(h, e)]), b: comb(&[(rad, a)]), c: comb(&[(rad, b)]) };
                Some((c, 2.0 / norm))
            }
            SlicerKind::Timelike { e0, e1, e2, kappa, sign } => {
                let ch = sign * tau / kappa;
                if ch < 1.0 - 1e-12 {
                    return None;
                }
                let ch = ch.max(1.0);
                let sh = (ch * ch - 1.0).sqrt();
                let c = Curve::Circle { a: comb(&[(ch, e0)]), b: comb(&[(sh, e1)]), c: comb(&[(sh, e2)]) };
                Some((c, 2.0 / kappa))
            }
            SlicerKind::Spacelike { e0, e1, e2, kappa } => {
                let sa = -tau / kappa;
                let ca = (1.0 + sa * sa).sqrt();
                let c = Curve::Hypercycle { a: comb(&[(sa, e2)]), b: comb(&[(ca, e0)]), c: comb(&[(ca, e1)]) };
                Some((c, 2.0 / kappa))
            }
            SlicerKind::Null { n1, n2, e, sign, det } => {
                let beta = sign * tau;
                if beta <= 0.0 {
                    return None;
                }
                let h = 0.5 / beta;
                let c = Curve::Horocycle { a: comb(&[(h, n1), (beta, n2)]), b: comb(&[(1.0, e)]), c: comb(&[(h, n1)]) };
                Some((c, 2.0 * det / beta))
            }
        }
    }
}

/// Integrals `∫ f w / (⟨ξ,u⟩ − p − i0)^m ω`, `m = 1..=orders`, for a real section.
pub fn integrate(
    f: &TestFunction,
    section: &Section,
    orders: usize,
    weights: &[Weight],
    opts: &CoareaOpts,
) -> Result<CoareaOutput> {
    let space = *f.space();
    if space.n() != 3 {
        return Err(Error::Unsupported(format!("co-area slicing needs n = 3, got n = {}", space.n())));
    }
    if !section.is_real() {
        return Err(Error::Precondition("the pv-delta mode needs a real section".into()));
    }
    let sheet = Sheet::of(&space)?;
    let xi = section.xi();
    let p = section.p().re;
    let len = orders * weights.len();
    let mut total = vec![Complex64::new(0.0, 0.0); len];
    let mut err = 0.0;
    for (coef, atom) in f.terms() {
        if *coef == 0.0 {
            continue;
        }
        // lower-sheet atoms: integrate u ↦ f(−u) against −ξ on the upper sheet
        let lower = matches!(atom.support(&space), Support::Ball { ref center, .. } if space.q() > 0 && center[0] < 0.0);
        let (atom, xi_eff, w_eff): (Atom, Vec<f64>, Vec<Weight>) = if lower {
            let single = TestFunction::new(space, vec![(1.0, atom.clone())])?.reflected();
            (single.terms()[0].1.clone(), xi.iter().map(|v| -v).collect(), weights.iter().map(Weight::reflected).collect())
        } else {
            (atom.clone(), xi.clone(), weights.to_vec())
        };
        let out = integrate_atom(&space, sheet, *coef, &atom, &xi_eff, p, orders, &w_eff, opts)?;
        for (t, v) in total.iter_mut().zip(&out.values) {
            *t += v;
        }
        err += out.error;
    }
    Ok(CoareaOutput { values: total, error: err })
}

#[allow(clippy::too_many_arguments)]
fn integrate_atom(
    space: &QuadraticSpace,
    sheet: Sheet,
    coef: f64,
    atom: &Atom,
    xi: &[f64],
    p: f64,
    orders: usize,
    weights: &[Weight],
    opts: &CoareaOpts,
) -> Result<CoareaOutput> {
    let slicer = Slicer::new(space, xi)?;
    let nw = weights.len();
    let zero = Complex64::new(0.0, 0.0);
    let (ball, (b_lo, b_hi)) = match atom.support(space) {
        Support::Ball { center, radius } => {
            let range = t_range_on_ball(space, xi, &center, radius)?;
            let (cr, _) = sheet.cs(radius * (1.0 + 1e-12));
            let sigma = sheet.sigma();
            (Some((center, cr, sigma)), range)
        }
        Support::Global => {
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            (None, (-norm, norm))
        }
        Support::EuclideanBall { .. } => return Err(Error::Unsupported("Euclidean bumps on a Riemannian sheet".into())),
    };
    let (s_lo, s_hi) = slicer.tau_range();
    let (t_lo, t_hi) = (b_lo.max(s_lo), b_hi.min(s_hi));
    if !(t_hi > t_lo) {
        return Ok(CoareaOutput { values: vec![zero; orders * nw], error: 0.0 });
    }
    let ballref = ball.as_ref().map(|(c, t, s)| (c.as_slice(), *t, *s));
    // g_w(τ) at one abscissa
    let sample = |tau: f64| -> Vec<Complex64> {
        let mut g = vec![zero; nw];
        let Some((curve, density)) = slicer.curve(tau) else {
            return g;
        };
        let Some((a, b)) = curve.interval(space, ballref) else {
            return g;
        };
        let mut integrand = |t: f64, o: &mut [Complex64]| {
            let u = curve.point(t);
            let fv = atom.eval(space, &u) * coef * density;
            for (wi, w) in weights.iter().enumerate() {
                o[wi] = w.eval(&u) * fv;
            }
        };
        let res = adaptive(
            &mut integrand,
            nw,
            &[a, 0.5 * (a + b), b],
            &AdaptiveOpts { abs_tol: 1e-300, rel_tol: opts.slice_rel_tol, max_intervals: 200, l1_fraction: 1.0 },
        );
        g.copy_from_slice(&res.value);
        g
    };
    pushforward_cauchy(&sample, (t_lo, t_hi), p, orders, nw, opts)
}

/// Cauchy integrals `∫ g_w(τ)/(τ − p − i0)^m dτ` of pushforward densities
/// sampled by `sample` on `[lo, hi]`, by nested Chebyshev–Lobatto refinement.
pub(crate) fn pushforward_cauchy(
    sample: &(dyn Fn(f64) -> Vec<Complex64> + Sync),
    (lo, hi): (f64, f64),
    p: f64,
    orders: usize,
    nw: usize,
    opts: &CoareaOpts,
) -> Result<CoareaOutput> {
    let zero = Complex64::new(0.0, 0.0);
    let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    let y = (p - mid) / half;
    let solve = |samples: &[Vec<Complex64>]| -> Result<Vec<Complex64>> {
        let mut out = vec![zero; orders * nw];
        for wi in 0..nw {
            let vals: Vec<Complex64> = samples.iter().map(|g| g[wi]).collect();
            let c = cauchy_on(&Cheb::from_lobatto(&vals), y, orders)?;
            for m in 1..=orders {
                out[wi * orders + m - 1] = c[m - 1] * half.powi(1 - m as i32);
            }
        }
        Ok(out)
    };

    let mut n = opts.cheb_nodes.max(3) | 1;
    let nodes = lobatto(n);
    let mut samples: Vec<Vec<Complex64>> = crate::par::map_indexed(n, |k| sample(mid + half * nodes[k]));
    let mut values = solve(&samples)?;
    loop {
        // nested refinement: the new Lobatto grid interleaves the old one
        let m = 2 * n - 1;
        let fine_nodes = lobatto(m);
        let fresh = crate::par::map_indexed(n - 1, |k| sample(mid + half * fine_nodes[2 * k + 1]));
        let mut merged = Vec::with_capacity(m);
        for k in 0..n {
            merged.push(std::mem::take(&mut samples[k]));
            if k + 1 < n {
                merged.push(fresh[k].clone());
            }
        }
        let refined = solve(&merged)?;
        let error = refined.iter().zip(&values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = refined.iter().map(|v| v.norm()).fold(0.0, f64::max);
        samples = merged;
        n = m;
        values = refined;
        if error <= opts.rel_tol * scale || error <= opts.abs_tol || n >= opts.max_nodes {
            return Ok(CoareaOutput { values, error });
        }
    }
}

/// `∫_{-1}^{1} g(s)/(s − y − i0)^m ds`, `m = 1..=orders`.
fn cauchy_on(g: &Cheb, y: f64, orders: usize) -> Result<Vec<Complex64>> {
    const EDGE: f64 = 1e-9;
    if y.abs() < 1.0 - EDGE {
        return Ok(g.cauchy_inside(y, orders - 1));
    }
    if y.abs() <= 1.0 + EDGE {
        // p at an extreme value of t on the support: non-transverse unless g vanishes there
        let edge = g.eval(y.signum());
        let scale = g.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if edge.norm() > 1e-10 * scale.max(1e-300) {
            return Err(Error::DegenerateSection("level set meets the support edge non-transversally".into()));
        }
    }
    let mut f = |s: f64, o: &mut [Complex64]| {
        let v = g.eval(s);
        let k = 1.0 / (s - y);
        let mut t = v;
        for oi in o.iter_mut() {
            t *= k;
            *oi = t;
        }
    };
    let r = adaptive(&mut f, orders, &[-1.0, 0.0, 1.0], &AdaptiveOpts { max_intervals: 200, ..AdaptiveOpts::default() });
    Ok(r.value)
}
