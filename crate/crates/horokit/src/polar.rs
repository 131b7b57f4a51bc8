//! Geodesic polar integration on `S²` and `H²` with near-singular Cauchy kernels.
//!
//! Around a center `c` with orthonormal tangent frame `(t_1, t_2)`,
//! `u(r, φ) = C(r) c + S(r)(cos φ t_1 + sin φ t_2)` and `ω = 2 S(r) dr dφ`.
//! The kernel denominator is `D = A(r) + P(r) cos φ + Q(r) sin φ` with
//! `A = C⟨ζ,c⟩ − p − iε`, `P = S⟨ζ,t_1⟩`, `Q = S⟨ζ,t_2⟩`. Its complex zeros in
//! `φ` are the roots of `(P − iQ) z² + 2A z + (P + iQ)` with `z = e^{iφ}`; the
//! ones close to the unit circle become breakpoints of an adaptive rule.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geodesic::{tangent_frame, Sheet};
use crate::quadratic::QuadraticSpace;
use crate::quadrature::{adaptive, AdaptiveOpts};
use crate::section::Section;
use crate::testfn::{Atom, Support, TestFunction};

/// Affine weight `w(u) = constant + linear · u` (bilinear, no conjugation).
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    pub constant: Complex64,
    pub linear: Vec<Complex64>,
}

impl Weight {
    pub fn one(n: usize) -> Self {
        Self { constant: Complex64::new(1.0, 0.0), linear: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// `w(u) = u_j`.
    pub fn coordinate(n: usize, j: usize) -> Self {
        let mut linear = vec![Complex64::new(0.0, 0.0); n];
        linear[j] = Complex64::new(1.0, 0.0);
        Self { constant: Complex64::new(0.0, 0.0), linear }
    }

    #[inline]
    pub fn eval(&self, u: &[f64]) -> Complex64 {
        self.constant + self.linear.iter().zip(u).map(|(a, b)| a * b).sum::<Complex64>()
    }

    /// Weight of `u ↦ w(−u)`.
    pub fn reflected(&self) -> Self {
        Self { constant: self.constant, linear: self.linear.iter().map(|v| -v).collect() }
    }
}

/// Kernel data: `∫ f w / (⟨ζ_s,u⟩ − p_s − iε)^m ω` for every section `s`,
/// weight `w`, and `m = 1..=orders`.
#[derive(Clone, Debug)]
pub struct KernelSpec<'a> {
    pub sections: &'a [Section],
    pub eps: f64,
    pub orders: usize,
    pub weights: &'a [Weight],
}

impl KernelSpec<'_> {
    pub fn len(&self) -> usize {
        self.sections.len() * self.weights.len() * self.orders
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat output index of `(section, weight, order m ≥ 1)`.
    pub fn index(&self, s: usize, w: usize, m: usize) -> usize {
        (s * self.weights.len() + w) * self.orders + (m - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarOpts {
    pub rel_tol: f64,
    pub inner_rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for PolarOpts {
    fn default() -> Self {
        Self { rel_tol: 1e-11, inner_rel_tol: 1e-12, max_intervals: 600 }
    }
}

/// Output of [`integrate`], laid out by [`KernelSpec::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct PolarOutput {
    pub values: Vec<Complex64>,
    pub error: f64,
    pub converged: bool,
}

/// Integrates every atom of `f` in polar coordinates. When `focus` lies in an
/// atom's support, the polar center is the focus; otherwise it is the atom's
/// own center.
pub fn integrate(f: &TestFunction, spec: &KernelSpec<'_>, focus: Option<&[f64]>, opts: &PolarOpts) -> Result<PolarOutput> {
    let space = *f.space();
    if space.n() != 3 {
        return Err(Error::Unsupported(format!("polar integration needs n = 3, got n = {}", space.n())));
    }
    let sheet = Sheet::of(&space)?;
    for sec in spec.sections {
        crate::error::check_dim(3, sec.zeta().len())?;
    }
    if spec.is_empty() {
        return Err(Error::Input("empty kernel request".into()));
    }
    let len = spec.len();
    let mut total = vec![Complex64::new(0.0, 0.0); len];
    let mut err = 0.0;
    let mut converged = true;
    for (coef, atom) in f.terms() {
        if *coef == 0.0 {
            continue;
        }
        let out = integrate_atom(&space, sheet, *coef, atom, spec, focus, opts)?;
        for (t, v) in total.iter_mut().zip(&out.values) {
            *t += v;
        }
        err += out.error;
        converged &= out.converged;
    }
    Ok(PolarOutput { values: total, error: err, converged })
}

struct Patch {
    center: Vec<f64>,
    frame: [Vec<f64>; 2],
    r_lo: f64,
    r_hi: f64,
    /// Ball constraint `(center b, geodesic radius)` for window computation.
    ball: Option<(Vec<f64>, f64)>,
}

fn same_sheet(space: &QuadraticSpace, a: &[f64], b: &[f64]) -> bool {
    space.q() == 0 || space.pair_rr(a, b) > 0.0
}

fn frame_at(space: &QuadraticSpace, c: &[f64]) -> Result<[Vec<f64>; 2]> {
    let base: Vec<f64> = if space.q() > 0 && c[0] < 0.0 { c.iter().map(|v| -v).collect() } else { c.to_vec() };
    let t = tangent_frame(space, &base)?;
    Ok([t[0].clone(), t[1].clone()])
}

fn make_patch(space: &QuadraticSpace, sheet: Sheet, atom: &Atom, focus: Option<&[f64]>) -> Result<Patch> {
    match atom.support(space) {
        Support::Global => {
            if sheet != Sheet::Sphere {
                return Err(Error::Input("globally supported function on a noncompact sheet".into()));
            }
            let center = focus.map(|x| x.to_vec()).unwrap_or_else(|| vec![0.0, 0.0, 1.0]);
            let frame = frame_at(space, &center)?;
            Ok(Patch { center, frame, r_lo: 0.0, r_hi: PI, ball: None })
        }
        Support::Ball { center: b, radius } => {
            let radius = radius * (1.0 + 1e-9);
            let use_focus = focus.filter(|x| {
                same_sheet(space, x, &b) && sheet.distance_from_pairing(space.pair_rr(x, &b)) < radius
            });
            let center = use_focus.map(|x| x.to_vec()).unwrap_or_else(|| b.clone());
            let d = sheet.distance_from_pairing(space.pair_rr(&center, &b));
            let frame = frame_at(space, &center)?;
            Ok(Patch {
                center,
                frame,
                r_lo: (d - radius).max(0.0),
                r_hi: (d + radius).min(sheet.max_radius()),
                ball: Some((b, radius)),
            })
        }
        Support::EuclideanBall { .. } => Err(Error::Unsupported("Euclidean bumps on a Riemannian sheet".into())),
    }
}

/// φ-window `(center, half-width)` of the ball at radius `r`, or `None` if empty.
fn window(sheet: Sheet, space: &QuadraticSpace, patch: &Patch, r: f64) -> Option<(f64, f64)> {
    let Some((b, rho)) = &patch.ball else {
        return Some((0.0, PI));
    };
    let (c, s) = sheet.cs(r);
    let ab = space.pair_rr(&patch.center, b);
    let b1 = space.pair_rr(&patch.frame[0], b);
    let b2 = space.pair_rr(&patch.frame[1], b);
    let rr = b1.hypot(b2);
    let (crho, _) = sheet.cs(*rho);
    let (phi_b, kappa) = match sheet {
        Sheet::Sphere => (b2.atan2(b1), (crho - c * ab) / (s * rr)),
        Sheet::Hyperbolic => (b2.atan2(b1) + PI, (c * ab - crho) / (s * rr)),
    };
    if !(s * rr > 0.0) || kappa.is_nan() || kappa <= -1.0 {
        // whole circle, provided the circle meets the ball at all
        let inside = match sheet {
            Sheet::Sphere => c * ab + s * rr >= crho,
            Sheet::Hyperbolic => c * ab - s * rr <= crho,
        };
        return if inside { Some((0.0, PI)) } else { None };
    }
    if kappa >= 1.0 {
        return None;
    }
    Some((phi_b, kappa.acos()))
}

/// Roots `z` of `(P − iQ) z² + 2A z + (P + iQ)`.
fn phi_roots(a: Complex64, p: Complex64, q: Complex64) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let qa = p - i * q;
    let qb = a * 2.0;
    let qc = p + i * q;
    let scale = qa.norm() + qb.norm() + qc.norm();
    if scale == 0.0 {
        return Vec::new();
    }
    if qa.norm() < 1e-14 * scale {
        if qb.norm() == 0.0 {
            return Vec::new();
        }
        return vec![-qc / qb];
    }
    let disc = (qb * qb - qa * qc * 4.0).sqrt();
    let s = if (qb.conj() * disc).re >= 0.0 { disc } else { -disc };
    let qq = -(qb + s) * 0.5;
    if qq.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    vec![qq / qa, qc / qq]
}

/// Near-real poles `(angle, distance to the real axis)`.
fn near_poles(a: Complex64, p: Complex64, q: Complex64) -> Vec<(f64, f64)> {
    phi_roots(a, p, q)
        .into_iter()
        .filter(|z| z.norm() > 0.0 && z.norm().is_finite())
        .map(|z| (z.arg(), z.norm().ln().abs()))
        .filter(|(_, d)| *d < 1.0)
        .collect()
}

fn graded_breaks(lo: f64, hi: f64, centers: &[(f64, f64)]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for &(c, d) in centers {
        let d = d.max(1e-15);
        for shift in [-TAU, 0.0, TAU] {
            let c = c + shift;
            if c > lo && c < hi {
                pts.push(c);
            }
            let mut h = d;
            while h < 0.5 * (hi - lo) {
                for x in [c - h, c + h] {
                    if x > lo && x < hi {
                        pts.push(x);
                    }
                }
                h *= 4.0;
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    pts
}

struct SectionCoeffs {
    a0: Complex64,
    z1: Complex64,
    z2: Complex64,
    p: Complex64,
}

struct Ctx<'a> {
    space: QuadraticSpace,
    sheet: Sheet,
    coef: f64,
    atom: &'a Atom,
    spec: &'a KernelSpec<'a>,
    patch: Patch,
    secs: Vec<SectionCoeffs>,
}

impl Ctx<'_> {
    fn coeffs(&self, k: usize, r: f64) -> (Complex64, Complex64, Complex64) {
        let (c, s) = self.sheet.cs(r);
        let sc = &self.secs[k];
        let a = sc.a0 * c - sc.p - Complex64::new(0.0, self.spec.eps);
        (a, sc.z1 * s, sc.z2 * s)
    }

    fn inner(&self, r: f64, out: &mut [Complex64], opts: &PolarOpts) -> (f64, bool) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let Some((phi_c, half)) = window(self.sheet, &self.space, &self.patch, r) else {
            return (0.0, true);
        };
        let (c, s) = self.sheet.cs(r);
        let abc: Vec<(Complex64, Complex64, Complex64)> = (0..self.secs.len()).map(|k| self.coeffs(k, r)).collect();
        let poles: Vec<(f64, f64)> = abc.iter().flat_map(|(a, p, q)| near_poles(*a, *p, *q)).collect();
        let (lo, hi) = if half >= PI {
            // start the period in the widest gap between poles
            let mut angles: Vec<f64> = poles.iter().map(|(t, _)| t.rem_euclid(TAU)).collect();
            angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let start = if angles.is_empty() {
                0.0
            } else {
                let mut best = (angles[0] + TAU - angles[angles.len() - 1], angles[angles.len() - 1]);
                for w in angles.windows(2) {
                    if w[1] - w[0] > best.0 {
                        best = (w[1] - w[0], w[0]);
                    }
                }
                best.1 + 0.5 * best.0
            };
            (start, start + TAU)
        } else {
            (phi_c - half, phi_c + half)
        };
        let breaks = graded_breaks(lo, hi, &poles);
        let n = self.spec.orders;
        let nw = self.spec.weights.len();
        let weights = self.spec.weights;
        let (cen, t1, t2) = (&self.patch.center, &self.patch.frame[0], &self.patch.frame[1]);
        let mut u = [0.0; 3];
        let mut wv = vec![Complex64::new(0.0, 0.0); nw];
        let mut f = |phi: f64, o: &mut [Complex64]| {
            let (sp, cp) = phi.sin_cos();
            for k in 0..3 {
                u[k] = c * cen[k] + s * (cp * t1[k] + sp * t2[k]);
            }
            let fv = self.atom.eval(&self.space, &u);
            if fv == 0.0 {
                o.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                return;
            }
            let base = self.coef * fv * 2.0 * s;
            for (wi, w) in weights.iter().enumerate() {
                wv[wi] = w.eval(&u) * base;
            }
            for (si, (a, pp, qq)) in abc.iter().enumerate() {
                let k = (a + pp * cp + qq * sp).inv();
                for wi in 0..nw {
                    let mut term = wv[wi];
                    let off = (si * nw + wi) * n;
                    for m in 0..n {
                        term *= k;
                        o[off + m] = term;
                    }
                }
            }
        };
        let res = adaptive(
            &mut f,
            out.len(),
            &breaks,
            &AdaptiveOpts { abs_tol: 1e-300, rel_tol: opts.inner_rel_tol, max_intervals: opts.max_intervals, l1_fraction: 1.0 },
        );
        out.copy_from_slice(&res.value);
        (res.error, res.converged)
    }

    /// Radii where a pole pair pinches the unit circle.
    fn pinch_radii(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = (self.patch.r_lo, self.patch.r_hi.min(30.0));
        let samples = 257;
        let mut out = Vec::new();
        for k in 0..self.secs.len() {
            let g = |r: f64| -> f64 {
                let (a, p, q) = self.coeffs(k, r);
                let roots = phi_roots(a, p, q);
                roots.iter().map(|z| z.norm().ln().abs()).fold(f64::INFINITY, f64::min)
            };
            let rs: Vec<f64> = (0..samples).map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64).collect();
            let gs: Vec<f64> = rs.iter().map(|&r| g(r)).collect();
            for i in 1..samples - 1 {
                if gs[i] <= gs[i - 1] && gs[i] <= gs[i + 1] && gs[i] < 0.2 {
                    // golden-section refinement on [r_{i-1}, r_{i+1}]
                    let (mut a, mut b) = (rs[i - 1], rs[i + 1]);
                    let phi = 0.5 * (5f64.sqrt() - 1.0);
                    let mut x1 = b - phi * (b - a);
                    let mut x2 = a + phi * (b - a);
                    let (mut g1, mut g2) = (g(x1), g(x2));
                    for _ in 0..80 {
                        if g1 < g2 {
                            b = x2;
                            x2 = x1;
                            g2 = g1;
                            x1 = b - phi * (b - a);
                            g1 = g(x1);
                        } else {
                            a = x1;
                            x1 = x2;
                            g1 = g2;
                            x2 = a + phi * (b - a);
                            g2 = g(x2);
                        }
                    }
                    let r = 0.5 * (a + b);
                    out.push((r, g(r).max(1e-14)));
                }
            }
        }
        out
    }
}

fn integrate_atom(
    space: &QuadraticSpace,
    sheet: Sheet,
    coef: f64,
    atom: &Atom,
    spec: &KernelSpec<'_>,
    focus: Option<&[f64]>,
    opts: &PolarOpts,
) -> Result<PolarOutput> {
    let patch = make_patch(space, sheet, atom, focus)?;
    let secs: Vec<SectionCoeffs> = spec
        .sections
        .iter()
        .map(|sec| SectionCoeffs {
            a0: space.pair_cr(sec.zeta(), &patch.center),
            z1: space.pair_cr(sec.zeta(), &patch.frame[0]),
            z2: space.pair_cr(sec.zeta(), &patch.frame[1]),
            p: sec.p(),
        })
        .collect();
    let ctx = Ctx { space: *space, sheet, coef, atom, spec, patch, secs };
    let (lo, hi) = (ctx.patch.r_lo, ctx.patch.r_hi);
    let len = spec.len();
    if !(hi > lo) {
        return Ok(PolarOutput { values: vec![Complex64::new(0.0, 0.0); len], error: 0.0, converged: true });
    }
    let mut breaks = vec![lo, hi];
    // grading toward the center when the section passes near it
    if lo == 0.0 {
        for sc in &ctx.secs {
            let defect = (sc.a0 - sc.p - Complex64::new(0.0, spec.eps)).norm();
            let slope = sc.z1.norm().max(sc.z2.norm()).max(1e-300);
            let mut h = 0.25 * defect / slope;
            if h < 0.1 * hi {
                h = h.max(1e-14);
                while h < hi {
                    breaks.push(h);
                    h *= 4.0;
                }
            }
        }
    }
    let pinches = ctx.pinch_radii();
    for (r, d) in pinches {
        breaks.push(r);
        let mut h = d;
        while h < 0.5 * (hi - lo) {
            breaks.push(r - h);
            breaks.push(r + h);
            h *= 4.0;
        }
    }
    breaks.retain(|r| *r >= lo && *r <= hi);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut inner_err = 0.0f64;
    let mut inner_ok = true;
    let mut f = |r: f64, o: &mut [Complex64]| {
        let (e, ok) = ctx.inner(r, o, opts);
        inner_err = inner_err.max(e);
        inner_ok &= ok;
    };
    let res = adaptive(
        &mut f,
        len,
        &breaks,
        &AdaptiveOpts { abs_tol: 1e-300, rel_tol: opts.rel_tol, max_intervals: opts.max_intervals, l1_fraction: 1e-3 },
    );
    for v in &res.value {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite(vec![v.re, v.im]));
        }
    }
    Ok(PolarOutput { values: res.value, error: res.error, converged: res.converged && inner_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::TestFunction;

    #[test]
    fn sphere_mass_and_bump_mass() {
        let s = QuadraticSpace::sphere(3).unwrap();
        let one = TestFunction::constant(s, 1.0).unwrap();
        // the weight cancels the kernel: (3 + u_3)/(u_3 + 3) = 1
        let sec = [Section::real(s, &[0.0, 0.0, 1.0], -3.0).unwrap()];
        let w = [Weight { constant: Complex64::new(3.0, 0.0), linear: vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)] }];
        let spec = KernelSpec { sections: &sec, eps: 0.0, orders: 1, weights: &w };
        let out = integrate(&one, &spec, None, &PolarOpts::default()).unwrap();
        assert!((out.values[0].re - 8.0 * PI).abs() < 1e-10, "{:?}", out.values);
    }
}
