//! The Cauchy–Radon transform `f̂(ζ, p) = ∫ f(x)/(⟨ζ, x⟩ − p − i0) ω`, its
//! `p`-derivatives, and the residual of the ultrahyperbolic equation.
//!
//! All entry points go through [`moments`], which evaluates the family
//! `∫ f w_k /(⟨ζ_s, u⟩ − p_s − iε)^m ω` for several sections, weights and
//! orders in one sweep. On two-dimensional Riemannian sheets the sweep uses
//! the polar engine (smooth or `ε`-regularized kernels) or co-area slicing
//! (exact `−i0` boundary values on real sections). Real horospheres on
//! `X_{2,n-2}` are sliced along their light-cone frame; everything else falls
//! back to tensor Gauss–Legendre quadrature in a chart.

use num_complex::Complex64;

use crate::chart::{Chart, ChartKind};
use crate::coarea::{self, CoareaOpts};
use crate::error::{Error, Result};
use crate::geodesic::{t_range_on_ball, Sheet};
use crate::nullslice;
use crate::par;
use crate::polar::{self, KernelSpec, PolarOpts, Weight};
use crate::quadrature::{Estimate, QuadratureGrid};
use crate::richardson::{extrapolate_with, ladder, Expansion};
use crate::section::{Regularization, Section, TransformValue};
use crate::testfn::{Support, TestFunction};

/// How the `−i0` limit is taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    /// Co-area slicing for real sections, plain quadrature otherwise.
    Auto,
    /// `ε = 0`; valid only when the denominator has no zeros on `supp f`.
    Direct,
    /// Principal value plus the `iπ δ` layer (real sections with `n = 3`,
    /// real horospheres on `X_{2,n-2}`).
    PvDelta,
    /// Ladder `ε₀ 2^{-k}`, `k < levels`, then Richardson extrapolation.
    EpsExtrapolation { eps0: f64, levels: usize, expansion: Expansion },
    /// A fixed regularization; negative values give the `+i0` side.
    FixedEps(f64),
}

impl Mode {
    /// The default extrapolation ladder `0.1 · 2^{-k}`, six levels.
    pub fn eps_default() -> Self {
        Mode::EpsExtrapolation { eps0: 0.1, levels: 6, expansion: Expansion::Integer }
    }
}

/// Accuracy knobs of the three integration engines.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub polar: PolarOpts,
    pub coarea: CoareaOpts,
    /// Pushforward engine for real horospheres on `X_{2,n-2}`.
    pub null_slice: CoareaOpts,
    /// Gauss–Legendre nodes per chart axis on the coarse grid (the error
    /// estimate doubles it).
    pub grid_nodes: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            polar: PolarOpts::default(),
            coarea: CoareaOpts::default(),
            null_slice: CoareaOpts { rel_tol: 1e-9, slice_rel_tol: 1e-10, ..CoareaOpts::default() },
            grid_nodes: 24,
        }
    }
}

/// `values[(s·W + w)·M + m − 1] = ∫ f w /(⟨ζ_s, u⟩ − p_s − i0)^m ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub values: Vec<Complex64>,
    pub error: f64,
    pub regularization: Regularization,
}

fn uses_sheet_engines(f: &TestFunction) -> bool {
    let s = f.space();
    s.n() == 3 && Sheet::of(s).is_ok()
}

/// Whether a real section meets the support of some atom of `f`.
pub fn meets_support(f: &TestFunction, section: &Section) -> Result<bool> {
    if !section.is_real() {
        return Err(Error::Precondition("support test needs a real section".into()));
    }
    let space = *f.space();
    let xi = section.xi();
    let p = section.p().re;
    for (c, atom) in f.terms() {
        if *c == 0.0 {
            continue;
        }
        match atom.support(&space) {
            Support::Ball { center, radius } => {
                let (lo, hi) = t_range_on_ball(&space, &xi, &center, radius)?;
                if p >= lo && p <= hi {
                    return Ok(true);
                }
            }
            Support::EuclideanBall { center, radius } => {
                // |⟨ξ, u − c⟩| ≤ |ξ| |u − c|
                let reach = radius * xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                let t = space.pair_rr(&xi, &center);
                if (p - t).abs() <= reach {
                    return Ok(true);
                }
            }
            Support::Global => return Ok(true),
        }
    }
    Ok(false)
}

/// Evaluates the moment family described above.
pub fn moments(
    f: &TestFunction,
    sections: &[Section],
    orders: usize,
    weights: &[Weight],
    mode: &Mode,
    res: &Resolution,
    focus: Option<&[f64]>,
) -> Result<Moments> {
    let space = *f.space();
    if sections.is_empty() || weights.is_empty() || orders == 0 {
        return Err(Error::Input("empty moment request".into()));
    }
    for s in sections {
        if *s.space() != space {
            return Err(Error::Input("section and test function live on different spaces".into()));
        }
    }
    let all_real = sections.iter().all(Section::is_real);
    let mode = match mode {
        Mode::Auto if all_real && uses_sheet_engines(f) => Mode::PvDelta,
        // slicing needs nested (n−2)-dimensional quadrature per level set, which
        // stays affordable only for n = 4
        Mode::Auto if all_real && space.p() == 2 && space.n() == 4 && sections.iter().all(Section::is_horosphere) => Mode::PvDelta,
        Mode::Auto if all_real => Mode::eps_default(),
        Mode::Auto => Mode::Direct,
        m => m.clone(),
    };
    if let Mode::Direct = mode {
        for s in sections.iter().filter(|s| s.is_real()) {
            if meets_support(f, s)? {
                return Err(Error::SingularKernel);
            }
        }
    }
    if uses_sheet_engines(f) {
        sheet_moments(f, sections, orders, weights, &mode, res, focus)
    } else {
        grid_moments(f, sections, orders, weights, &mode, res)
    }
}

fn sheet_moments(
    f: &TestFunction,
    sections: &[Section],
    orders: usize,
    weights: &[Weight],
    mode: &Mode,
    res: &Resolution,
    focus: Option<&[f64]>,
) -> Result<Moments> {
    let polar_at = |eps: f64| -> Result<(Vec<Complex64>, f64)> {
        let spec = KernelSpec { sections, eps, orders, weights };
        let out = polar::integrate(f, &spec, focus, &res.polar)?;
        Ok((out.values, out.error))
    };
    match mode {
        Mode::Direct => {
            let (values, error) = polar_at(0.0)?;
            Ok(Moments { values, error, regularization: Regularization::Direct })
        }
        Mode::FixedEps(eps) => {
            check_eps(*eps)?;
            let (values, error) = polar_at(*eps)?;
            Ok(Moments { values, error, regularization: Regularization::FixedEps(*eps) })
        }
        Mode::EpsExtrapolation { eps0, levels, expansion } => {
            let lad = checked_ladder(*eps0, *levels)?;
            let mut levels_out = Vec::with_capacity(lad.len());
            let mut quad_err: f64 = 0.0;
            for &e in &lad {
                let (v, err) = polar_at(e)?;
                quad_err = quad_err.max(err);
                levels_out.push(v);
            }
            let ex = extrapolate_with(&levels_out, 2.0, *expansion);
            Ok(Moments {
                values: ex.value,
                error: ex.error + quad_err,
                regularization: Regularization::EpsExtrapolation { ladder: lad },
            })
        }
        Mode::PvDelta => {
            if !sections.iter().all(Section::is_real) {
                return Err(Error::Precondition("the pv-delta mode needs real sections".into()));
            }
            let per = par::map_indexed(sections.len(), |s| coarea::integrate(f, &sections[s], orders, weights, &res.coarea));
            let mut values = Vec::with_capacity(sections.len() * weights.len() * orders);
            let mut error = 0.0;
            for out in per {
                let out = out?;
                values.extend(out.values);
                error += out.error;
            }
            Ok(Moments { values, error, regularization: Regularization::PvDelta })
        }
        Mode::Auto => unreachable!("resolved by the caller"),
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(Error::Input("fixed eps must be finite and nonzero".into()));
    }
    Ok(())
}

fn checked_ladder(eps0: f64, levels: usize) -> Result<Vec<f64>> {
    if !(eps0 > 0.0 && eps0.is_finite()) || levels < 2 {
        return Err(Error::Input("eps ladder needs eps0 > 0 and at least two levels".into()));
    }
    Ok(ladder(eps0, levels))
}

/// Chart box covering `supp f`, or an error if the support leaves the chart.
pub fn support_box(chart: &Chart, f: &TestFunction) -> Result<Vec<(f64, f64)>> {
    let space = *chart.space();
    let n = space.n();
    let full: Vec<(f64, f64)> = (0..chart.dim())
        .map(|k| if chart.is_periodic(k) { (0.0, std::f64::consts::TAU) } else { chart.bounds()[k] })
        .collect();
    if chart.kind() == ChartKind::Angular {
        return Ok(full);
    }
    let mut lo = vec![f64::INFINITY; chart.dim()];
    let mut hi = vec![f64::NEG_INFINITY; chart.dim()];
    let mut widen = |k: usize, a: f64, b: f64| {
        lo[k] = lo[k].min(a);
        hi[k] = hi[k].max(b);
    };
    for (c, atom) in f.terms() {
        if *c == 0.0 {
            continue;
        }
        match (chart.kind(), atom.support(&space)) {
            (ChartKind::Graph, Support::Ball { center, radius }) => {
                if center[0] <= 0.0 {
                    return Err(Error::Domain(center));
                }
                for k in 1..n {
                    let mut e = vec![0.0; n];
                    e[k] = 1.0;
                    // ⟨e_k, u⟩ = −u_k on this signature
                    let (a, b) = t_range_on_ball(&space, &e, &center, radius)?;
                    widen(k - 1, -b, -a);
                }
            }
            (ChartKind::Product, Support::EuclideanBall { center, radius }) => {
                let rho = center[0].hypot(center[1]);
                let phi0 = center[1].atan2(center[0]);
                if radius < rho {
                    let w = (radius / rho).asin();
                    widen(0, phi0 - w, phi0 + w);
                } else {
                    widen(0, phi0 - std::f64::consts::PI, phi0 + std::f64::consts::PI);
                }
                for k in 2..n {
                    widen(k - 1, center[k] - radius, center[k] + radius);
                }
            }
            _ => return Ok(full),
        }
    }
    let mut out = Vec::with_capacity(chart.dim());
    for k in 0..chart.dim() {
        if lo[k] > hi[k] {
            return Ok(full);
        }
        if chart.is_periodic(k) {
            out.push((lo[k], hi[k]));
        } else {
            let (clo, chi) = chart.bounds()[k];
            if lo[k] < clo || hi[k] > chi {
                return Err(Error::Domain(vec![lo[k], hi[k]]));
            }
            out.push((lo[k], hi[k]));
        }
    }
    Ok(out)
}

/// `∫ f ω` on a Gauss–Legendre grid over the support box, with `nodes` per
/// axis (doubled along the periodic axis of the angular chart) and a
/// one-refinement error estimate.
pub fn integral(f: &TestFunction, nodes: usize) -> Result<Estimate<f64>> {
    let chart = Chart::standard(*f.space())?;
    let bounds = support_box(&chart, f)?;
    let counts = (0..chart.dim())
        .map(|k| if chart.kind() == ChartKind::Angular && chart.is_periodic(k) { 2 * nodes } else { nodes })
        .collect();
    let grid = grid_on(chart, bounds, counts)?;
    crate::quadrature::integrate(&|x: &[f64]| f.eval(x), &grid)
}

/// Periodic axes may be shifted by whole turns; the chart check only sees bounded axes.
fn grid_on(chart: Chart, bounds: Vec<(f64, f64)>, counts: Vec<usize>) -> Result<QuadratureGrid> {
    let mut shifted = bounds;
    for (k, b) in shifted.iter_mut().enumerate() {
        if chart.is_periodic(k) {
            let turns = (b.0 / std::f64::consts::TAU).floor();
            b.0 -= turns * std::f64::consts::TAU;
            b.1 -= turns * std::f64::consts::TAU;
        }
    }
    QuadratureGrid::new(chart, shifted, counts)
}

fn grid_sum(grid: &QuadratureGrid, len: usize, term: &(dyn Fn(&[f64], &mut [Complex64]) -> Result<()> + Sync)) -> Result<Vec<Complex64>> {
    let nodes = par::map_indexed(grid.len(), |i| -> Result<Vec<Complex64>> {
        let (u, w) = grid.node(i)?;
        let x = grid.chart().embed_unchecked(&u);
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        term(&x, &mut out)?;
        for v in out.iter_mut() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(x.clone()));
            }
            *v *= w;
        }
        Ok(out)
    });
    let nodes: Vec<Vec<Complex64>> = nodes.into_iter().collect::<Result<_>>()?;
    Ok((0..len)
        .map(|k| {
            let col: Vec<Complex64> = nodes.iter().map(|v| v[k]).collect();
            par::pairwise_sum(&col)
        })
        .collect())
}

fn grid_moments(
    f: &TestFunction,
    sections: &[Section],
    orders: usize,
    weights: &[Weight],
    mode: &Mode,
    res: &Resolution,
) -> Result<Moments> {
    let space = *f.space();
    let chart = Chart::standard(space)?;
    let bounds = support_box(&chart, f)?;
    let counts = vec![res.grid_nodes.max(2); chart.dim()];
    let coarse = grid_on(chart, bounds, counts)?;
    let fine = coarse.refined();
    let nw = weights.len();
    let len = sections.len() * nw * orders;
    let at = |eps: f64, grid: &QuadratureGrid| -> Result<Vec<Complex64>> {
        let term = |x: &[f64], out: &mut [Complex64]| -> Result<()> {
            let fx = f.eval(x);
            if fx == 0.0 {
                return Ok(());
            }
            for (s, sec) in sections.iter().enumerate() {
                let d = sec.defect(x) - Complex64::new(0.0, eps);
                if d == Complex64::new(0.0, 0.0) {
                    return Err(Error::SingularKernel);
                }
                let inv = 1.0 / d;
                for (wi, w) in weights.iter().enumerate() {
                    let mut t = w.eval(x) * fx;
                    for m in 0..orders {
                        t *= inv;
                        out[(s * nw + wi) * orders + m] = t;
                    }
                }
            }
            Ok(())
        };
        grid_sum(grid, len, &term)
    };
    let pair = |eps: f64| -> Result<(Vec<Complex64>, f64)> {
        let a = at(eps, &coarse)?;
        let b = at(eps, &fine)?;
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        Ok((b, err))
    };
    match mode {
        Mode::Direct => {
            let (values, error) = pair(0.0)?;
            Ok(Moments { values, error, regularization: Regularization::Direct })
        }
        Mode::FixedEps(eps) => {
            check_eps(*eps)?;
            let (values, error) = pair(*eps)?;
            Ok(Moments { values, error, regularization: Regularization::FixedEps(*eps) })
        }
        Mode::EpsExtrapolation { eps0, levels, expansion } => {
            let lad = checked_ladder(*eps0, *levels)?;
            let mut vals = Vec::new();
            let mut quad_err: f64 = 0.0;
            for &e in &lad {
                let (v, err) = pair(e)?;
                quad_err = quad_err.max(err);
                vals.push(v);
            }
            let ex = extrapolate_with(&vals, 2.0, *expansion);
            Ok(Moments {
                values: ex.value,
                error: ex.error + quad_err,
                regularization: Regularization::EpsExtrapolation { ladder: lad },
            })
        }
        Mode::PvDelta => {
            if space.p() != 2 || space.n() < 4 {
                return Err(Error::Unsupported("the pv-delta mode needs a Riemannian sheet or X_(2, n−2)".into()));
            }
            let per = par::map_indexed(sections.len(), |s| nullslice::integrate(f, &sections[s], orders, weights, &res.null_slice));
            let mut values = Vec::with_capacity(len);
            let mut error = 0.0;
            for out in per {
                let out = out?;
                values.extend(out.values);
                error += out.error;
            }
            Ok(Moments { values, error, regularization: Regularization::PvDelta })
        }
        Mode::Auto => unreachable!("resolved by the caller"),
    }
}

/// `f̂(ζ, p)`.
pub fn radon_cauchy(f: &TestFunction, section: &Section, mode: &Mode, res: &Resolution) -> Result<TransformValue> {
    radon_cauchy_dp(f, section, 0, mode, res)
}

/// `∂_p^k f̂(ζ, p) = k! ∫ f /(⟨ζ, u⟩ − p − i0)^{k+1} ω`.
pub fn radon_cauchy_dp(f: &TestFunction, section: &Section, k: usize, mode: &Mode, res: &Resolution) -> Result<TransformValue> {
    let stack = derivative_stack(f, section, k, mode, res, None)?;
    Ok(stack.into_iter().next_back().expect("nonempty stack"))
}

/// `∂_p^k f̂` for `k = 0..=kmax`, each with its own error estimate.
pub fn derivative_stack(
    f: &TestFunction,
    section: &Section,
    kmax: usize,
    mode: &Mode,
    res: &Resolution,
    focus: Option<&[f64]>,
) -> Result<Vec<TransformValue>> {
    let m = moments(f, std::slice::from_ref(section), kmax + 1, &[Weight::one(section.space().n())], mode, res, focus)?;
    let mut fact = 1.0;
    (0..=kmax)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            TransformValue::new(m.values[k] * fact, m.error * fact, m.regularization.clone())
        })
        .collect()
}

/// Finite-difference residual of `{□(∂_ξ) − ∂_p²} f̂` with its noise floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeResidual {
    pub value: Complex64,
    /// Propagated quadrature error: `(4n + 4)/h²` times the largest value error.
    pub noise: f64,
}

/// Central differences with step `h` in every `ξ_j` and in `p`.
pub fn ultrahyperbolic_residual(f: &TestFunction, section: &Section, h: f64, mode: &Mode, res: &Resolution) -> Result<PdeResidual> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Input("step must be positive".into()));
    }
    if !section.is_real() {
        return Err(Error::Precondition("the ultrahyperbolic residual is defined on real sections".into()));
    }
    let space = *section.space();
    let n = space.n();
    let xi = section.xi();
    let p = section.p().re;
    let mut secs = vec![section.clone()];
    for j in 0..n {
        for sgn in [1.0, -1.0] {
            let mut x = xi.clone();
            x[j] += sgn * h;
            secs.push(Section::real(space, &x, p)?);
        }
    }
    secs.push(Section::real(space, &xi, p + h)?);
    secs.push(Section::real(space, &xi, p - h)?);
    let m = moments(f, &secs, 1, &[Weight::one(n)], mode, res, None)?;
    let v = &m.values;
    let centre = v[0];
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        acc += (v[1 + 2 * j] - 2.0 * centre + v[2 + 2 * j]) * space.delta(j);
    }
    acc -= v[2 * n + 1] - 2.0 * centre + v[2 * n + 2];
    let h2 = h * h;
    let per_value = m.error / secs.len() as f64;
    let noise = (4 * n + 4) as f64 * per_value / h2;
    Ok(PdeResidual { value: acc / h2, noise })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::QuadraticSpace;

    #[test]
    fn derivative_matches_difference_quotient() {
        let s = QuadraticSpace::hyperbolic(3).unwrap();
        let f = TestFunction::bump(s, vec![1.25f64.sqrt(), 0.5, 0.0], 0.8).unwrap();
        let sec = Section::real(s, &[0.5, 1.0, 0.3], 0.1).unwrap();
        let res = Resolution::default();
        let d = radon_cauchy_dp(&f, &sec, 1, &Mode::PvDelta, &res).unwrap();
        let h = 1e-3;
        let up = radon_cauchy(&f, &sec.with_p((0.1 + h).into()), &Mode::PvDelta, &res).unwrap();
        let dn = radon_cauchy(&f, &sec.with_p((0.1 - h).into()), &Mode::PvDelta, &res).unwrap();
        let fd = (up.value - dn.value) / (2.0 * h);
        assert!((fd - d.value).norm() < 1e-5f64.max(10.0 * h * h) * d.value.norm().max(1.0), "{fd} vs {}", d.value);
    }

    #[test]
    fn direct_mode_refuses_crossing_sections() {
        let s = QuadraticSpace::sphere(3).unwrap();
        let f = TestFunction::bump(s, vec![0.0, 0.0, 1.0], 0.5).unwrap();
        let sec = Section::real(s, &[0.0, 0.0, 1.0], 0.95).unwrap();
        assert_eq!(radon_cauchy(&f, &sec, &Mode::Direct, &Resolution::default()), Err(Error::SingularKernel));
    }

    #[test]
    fn grid_path_handles_four_dimensions() {
        let s = QuadraticSpace::hyperbolic(4).unwrap();
        let f = TestFunction::bump(s, vec![1.0, 0.0, 0.0, 0.0], 0.8).unwrap();
        let sec = Section::real(s, &[1.0, 0.0, 0.0, 0.0], 3.0).unwrap();
        let v = radon_cauchy(&f, &sec, &Mode::Direct, &Resolution::default()).unwrap();
        let w = radon_cauchy(&f, &sec.scaled(2.0), &Mode::Direct, &Resolution::default()).unwrap();
        assert!((w.value * 2.0 - v.value).norm() < 1e-8 * v.value.norm());
        assert!(v.error_estimate < 1e-4 * v.value.norm(), "{v:?}");
    }
}
