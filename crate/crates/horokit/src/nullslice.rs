//! Principal-value engine for real horospheres on `X_{2,n-2}`.
//!
//! For a real isotropic `ξ` pick the isotropic partner `ξ* = Gξ/|ξ|²`
//! (`⟨ξ, ξ*⟩ = 1`) and an orthonormal frame `e_k` of `{ξ, ξ*}^⊥`, which
//! splits as one positive and `n − 3` negative directions. Writing
//! `u = τξ* + βξ + Σ y_k e_k` puts the quadric in the form
//! `2τβ + y₁² − Σ_{k≥2} y_k² = 1` with `τ = ⟨ξ, u⟩`, and the invariant measure
//! becomes `(n−1)!/|τ| dτ dy`. The level sets `τ = const` are paraboloids;
//! their integrals give the pushforward density `g(τ)`, whose Cauchy
//! transform is taken in closed form as on the Riemannian sheets.
//!
//! Near `τ = 0` the `y` chart degenerates (the paraboloid runs off to
//! infinity in `β`), so there the level set is parametrized by `(β, y_{≥2})`
//! with `y₁ = ±√(1 + Σ y_k² − 2τβ)` and density `(n−1)!/|y₁|`.

use num_complex::Complex64;

use crate::coarea::{pushforward_cauchy, CoareaOpts, CoareaOutput};
use crate::error::{Error, Result};
use crate::polar::Weight;
use crate::quadratic::QuadraticSpace;
use crate::quadrature::{adaptive, AdaptiveOpts};
use crate::section::Section;
use crate::testfn::{Atom, Support, TestFunction};

/// Light-cone frame adapted to `ξ`.
struct Frame {
    xi: Vec<f64>,
    xi_star: Vec<f64>,
    /// `e[0]` is positive, the rest negative.
    e: Vec<Vec<f64>>,
    xi_norm: f64,
    /// `(n − 1)!`
    fact: f64,
}

impl Frame {
    fn new(space: &QuadraticSpace, xi: &[f64]) -> Result<Self> {
        let n = space.n();
        let norm2: f64 = xi.iter().map(|v| v * v).sum();
        let pos = xi[0].hypot(xi[1]);
        if pos == 0.0 {
            return Err(Error::DegenerateSection("zero normal".into()));
        }
        let xi_star: Vec<f64> = (0..n).map(|k| (if k < 2 { xi[k] } else { -xi[k] }) / norm2).collect();
        let mut e = vec![{
            let mut v = vec![0.0; n];
            v[0] = -xi[1] / pos;
            v[1] = xi[0] / pos;
            v
        }];
        // orthonormal complement of ξ₋ inside the negative block
        let neg: Vec<f64> = xi[2..].iter().map(|v| v / pos).collect();
        let mut basis: Vec<Vec<f64>> = vec![neg];
        for k in 0..n - 2 {
            if basis.len() == n - 2 {
                break;
            }
            let mut v = vec![0.0; n - 2];
            v[k] = 1.0;
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                v.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
            }
            let l = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if l > 1e-8 {
                v.iter_mut().for_each(|a| *a /= l);
                basis.push(v);
            }
        }
        for b in basis.into_iter().skip(1) {
            let mut v = vec![0.0; 2];
            v.extend(b);
            e.push(v);
        }
        let fact = (1..n).map(|k| k as f64).product();
        Ok(Self { xi: xi.to_vec(), xi_star, e, xi_norm: norm2.sqrt(), fact })
    }

    fn point(&self, tau: f64, beta: f64, y: &[f64]) -> Vec<f64> {
        let mut u: Vec<f64> = self.xi_star.iter().zip(&self.xi).map(|(s, x)| tau * s + beta * x).collect();
        for (yk, ek) in y.iter().zip(&self.e) {
            u.iter_mut().zip(ek).for_each(|(a, b)| *a += yk * b);
        }
        u
    }
}

/// `y_k = ε_k ⟨e_k, c⟩`, `β = ⟨ξ*, c⟩`, `τ = ⟨ξ, c⟩` at the bump center.
fn coords(space: &QuadraticSpace, fr: &Frame, c: &[f64]) -> (f64, f64, Vec<f64>) {
    let y = fr.e.iter().enumerate().map(|(k, ek)| (if k == 0 { 1.0 } else { -1.0 }) * space.pair_rr(ek, c)).collect();
    (space.pair_rr(&fr.xi, c), space.pair_rr(&fr.xi_star, c), y)
}

/// Nested adaptive quadrature of `f` over a box; the innermost interval is
/// narrowed by `inner` (which may split it in two) given the outer coordinates.
fn nested(
    f: &mut dyn FnMut(&[f64], &mut [Complex64]),
    len: usize,
    outer: &[(f64, f64)],
    inner: &dyn Fn(&[f64]) -> Vec<(f64, f64)>,
    prefix: &mut Vec<f64>,
    opts: &AdaptiveOpts,
) -> (Vec<Complex64>, f64) {
    let zero = Complex64::new(0.0, 0.0);
    let depth = prefix.len();
    if depth == outer.len() {
        let mut total = vec![zero; len];
        let mut err = 0.0;
        for (a, b) in inner(prefix) {
            let mut g = |x: f64, o: &mut [Complex64]| {
                prefix.push(x);
                f(prefix, o);
                prefix.pop();
            };
            let r = adaptive(&mut g, len, &breaks(a, b), opts);
            total.iter_mut().zip(&r.value).for_each(|(t, v)| *t += v);
            err += r.error;
        }
        return (total, err);
    }
    let (a, b) = outer[depth];
    let mut worst: f64 = 0.0;
    let r = {
        let mut g = |x: f64, o: &mut [Complex64]| {
            prefix.push(x);
            let (v, e) = nested(f, len, outer, inner, prefix, opts);
            prefix.pop();
            worst = worst.max(e);
            o.copy_from_slice(&v);
        };
        adaptive(&mut g, len, &breaks(a, b), opts)
    };
    (r.value, r.error + worst * (b - a))
}

/// Four starting panels, so that a narrow support is not stepped over.
fn breaks(a: f64, b: f64) -> Vec<f64> {
    (0..=4).map(|k| a + (b - a) * k as f64 / 4.0).collect()
}

/// `{x : lo ≤ x² ≤ hi} ∩ [a, b]` as up to two intervals.
fn square_band(lo: f64, hi: f64, (a, b): (f64, f64)) -> Vec<(f64, f64)> {
    if hi < 0.0 || hi < lo {
        return Vec::new();
    }
    let (r0, r1) = (lo.max(0.0).sqrt(), hi.sqrt());
    [(-r1, -r0), (r0, r1)]
        .into_iter()
        .map(|(x, y)| (x.max(a), y.min(b)))
        .filter(|(x, y)| y > x)
        .collect()
}

/// Integrals `∫ f w / (⟨ξ, u⟩ − p − i0)^m ω`, `m = 1..=orders`, for a real
/// horosphere on `X_{2,n-2}`.
pub fn integrate(
    f: &TestFunction,
    section: &Section,
    orders: usize,
    weights: &[Weight],
    opts: &CoareaOpts,
) -> Result<CoareaOutput> {
    let space = *f.space();
    if space.p() != 2 || space.n() < 4 {
        return Err(Error::Unsupported("null slicing is implemented on X_(2, n−2), n ≥ 4".into()));
    }
    if !section.is_real() {
        return Err(Error::Precondition("the pv-delta mode needs a real section".into()));
    }
    if !section.is_horosphere() {
        return Err(Error::Unsupported("the pv-delta mode on X_(2, n−2) needs an isotropic normal".into()));
    }
    let fr = Frame::new(&space, &section.xi())?;
    let p = section.p().re;
    let mut total = vec![Complex64::new(0.0, 0.0); orders * weights.len()];
    let mut err = 0.0;
    for (coef, atom) in f.terms() {
        if *coef == 0.0 {
            continue;
        }
        let out = integrate_atom(&space, &fr, *coef, atom, p, orders, weights, opts)?;
        total.iter_mut().zip(&out.values).for_each(|(t, v)| *t += v);
        err += out.error;
    }
    Ok(CoareaOutput { values: total, error: err })
}

#[allow(clippy::too_many_arguments)]
fn integrate_atom(
    space: &QuadraticSpace,
    fr: &Frame,
    coef: f64,
    atom: &Atom,
    p: f64,
    orders: usize,
    weights: &[Weight],
    opts: &CoareaOpts,
) -> Result<CoareaOutput> {
    let Support::EuclideanBall { center, radius } = atom.support(space) else {
        return Err(Error::Unsupported("null slicing needs compactly supported atoms".into()));
    };
    let r = radius * (1.0 + 1e-12);
    let (tc, bc, yc) = coords(space, fr, &center);
    let (t_lo, t_hi) = (tc - r * fr.xi_norm, tc + r * fr.xi_norm);
    let (b_lo, b_hi) = (bc - r / fr.xi_norm, bc + r / fr.xi_norm);
    let ybox: Vec<(f64, f64)> = yc.iter().map(|c| (c - r, c + r)).collect();
    let nw = weights.len();
    let inner_opts = AdaptiveOpts { abs_tol: 1e-300, rel_tol: opts.slice_rel_tol, max_intervals: 200, l1_fraction: 1.0 };

    let sample = |tau: f64| -> Vec<Complex64> {
        let eval = |u: &[f64], scale: f64, o: &mut [Complex64]| {
            let v = atom.eval(space, u);
            if v == 0.0 {
                o.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                return;
            }
            let v = v * coef * scale;
            for (oi, w) in o.iter_mut().zip(weights) {
                *oi = w.eval(u) * v;
            }
        };
        let reach = 2.0 * (tau * b_lo).max(tau * b_hi);
        let mut prefix = Vec::new();
        if reach <= 0.75 {
            // (β, y₂, …) chart; y₁ on both branches
            let mut outer = vec![(b_lo, b_hi)];
            outer.extend_from_slice(&ybox[1..ybox.len() - 1]);
            let last = ybox[ybox.len() - 1];
            let mut integrand = |x: &[f64], o: &mut [Complex64]| {
                let (beta, rest) = (x[0], &x[1..]);
                let s2: f64 = rest.iter().map(|v| v * v).sum();
                let y1 = (1.0 + s2 - 2.0 * tau * beta).sqrt();
                let mut acc = vec![Complex64::new(0.0, 0.0); nw];
                let mut tmp = vec![Complex64::new(0.0, 0.0); nw];
                for sign in [-1.0, 1.0] {
                    let mut y = vec![sign * y1];
                    y.extend_from_slice(rest);
                    eval(&fr.point(tau, beta, &y), fr.fact / y1, &mut tmp);
                    acc.iter_mut().zip(&tmp).for_each(|(a, t)| *a += t);
                }
                o.copy_from_slice(&acc);
            };
            // innermost variable is the last negative coordinate; β and y₂.. sit outside
            let inner = |_: &[f64]| vec![last];
            let (v, _) = nested(&mut integrand, nw, &outer, &inner, &mut prefix, &inner_opts);
            v
        } else {
            // y chart; β = (1 − y₁² + Σ y_k²)/(2τ) must stay in its range
            let outer = ybox[1..].to_vec();
            let y1box = ybox[0];
            let mut integrand = |x: &[f64], o: &mut [Complex64]| {
                let rest = &x[..x.len() - 1];
                let y1 = x[x.len() - 1];
                let s2: f64 = rest.iter().map(|v| v * v).sum();
                let beta = (1.0 - y1 * y1 + s2) / (2.0 * tau);
                let mut y = vec![y1];
                y.extend_from_slice(rest);
                eval(&fr.point(tau, beta, &y), fr.fact / tau.abs(), o);
            };
            let inner = |rest: &[f64]| {
                let s2: f64 = rest.iter().map(|v| v * v).sum();
                let (a, b) = (1.0 + s2 - 2.0 * tau * b_lo, 1.0 + s2 - 2.0 * tau * b_hi);
                square_band(a.min(b), a.max(b), y1box)
            };
            let (v, _) = nested(&mut integrand, nw, &outer, &inner, &mut prefix, &inner_opts);
            v
        }
    };
    pushforward_cauchy(&sample, (t_lo, t_hi), p, orders, nw, opts)
}
