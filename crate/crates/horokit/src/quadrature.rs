//! Gauss–Legendre rules, adaptive Gauss–Kronrod, and tensor grids on charts.

use std::collections::HashMap;
use std::ops::{Add, Mul};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::par;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(compute_gl(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gl_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(n);
    let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
    (
        rule.0.iter().map(|t| m + h * t).collect(),
        rule.1.iter().map(|w| h * w).collect(),
    )
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`adaptive`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Tolerance floor as a fraction of `∫|f|`; guards against chasing
    /// relative accuracy in a result that cancels to nearly zero.
    pub l1_fraction: f64,
}

impl Default for AdaptiveOpts {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-11, max_intervals: 400, l1_fraction: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveResult {
    pub value: Vec<Complex64>,
    pub error: f64,
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
    resabs: f64,
}

fn gk15(f: &mut dyn FnMut(f64, &mut [Complex64]), len: usize, a: f64, b: f64, buf: &mut Vec<Complex64>) -> Piece {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let zero = Complex64::new(0.0, 0.0);
    let mut k = vec![zero; len];
    let mut g = vec![zero; len];
    // 15 samples, stored so that resasc can be formed afterwards.
    let mut samples = vec![zero; 15 * len];
    buf.resize(len, zero);
    for j in 0..15 {
        let (x, wk, wg) = if j < 7 {
            (c - h * XGK[j], WGK[j], if j % 2 == 1 { WG[j / 2] } else { 0.0 })
        } else if j == 7 {
            (c, WGK[7], WG[3])
        } else {
            let i = 14 - j;
            (c + h * XGK[i], WGK[i], if i % 2 == 1 { WG[i / 2] } else { 0.0 })
        };
        f(x, buf);
        for l in 0..len {
            let v = buf[l];
            samples[j * len + l] = v;
            k[l] += v * wk;
            g[l] += v * wg;
        }
    }
    let mut diff = 0.0f64;
    let mut resasc = 0.0f64;
    let mut resabs = 0.0f64;
    for l in 0..len {
        diff = diff.max(((k[l] - g[l]) * h).norm());
        let mean = k[l] * 0.5;
        let mut asc = 0.0;
        let mut abs = 0.0;
        for j in 0..15 {
            let wk = if j < 8 { WGK[j] } else { WGK[14 - j] };
            asc += wk * (samples[j * len + l] - mean).norm();
            abs += wk * samples[j * len + l].norm();
        }
        resasc = resasc.max(asc * h.abs());
        resabs = resabs.max(abs * h.abs());
    }
    let mut err = diff;
    if resasc != 0.0 && diff != 0.0 {
        err = resasc * (200.0 * diff / resasc).powf(1.5).min(1.0);
    }
    err = err.max(50.0 * f64::EPSILON * resabs);
    let value = k.into_iter().map(|v| v * h).collect();
    Piece { a, b, value, error: err, resabs }
}

/// Globally adaptive vector-valued Gauss–Kronrod quadrature over the
/// consecutive intervals defined by `breakpoints` (sorted, at least two).
pub fn adaptive(
    f: &mut dyn FnMut(f64, &mut [Complex64]),
    len: usize,
    breakpoints: &[f64],
    opts: &AdaptiveOpts,
) -> AdaptiveResult {
    let mut buf = Vec::with_capacity(len);
    let mut pieces: Vec<Piece> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(f, len, w[0], w[1], &mut buf))
        .collect();
    let zero = Complex64::new(0.0, 0.0);
    if pieces.is_empty() {
        return AdaptiveResult { value: vec![zero; len], error: 0.0, converged: true };
    }
    loop {
        let mut total = vec![zero; len];
        let mut err = 0.0;
        let mut l1 = 0.0;
        for p in &pieces {
            l1 += p.resabs;
            for (t, v) in total.iter_mut().zip(&p.value) {
                *t += v;
            }
            err += p.error;
        }
        let scale = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = opts.abs_tol.max(opts.rel_tol * scale.max(opts.l1_fraction * l1));
        if err <= tol || pieces.len() >= opts.max_intervals {
            return AdaptiveResult { value: total, error: err, converged: err <= tol };
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let worst = pieces.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return AdaptiveResult { value: total, error: err, converged: false };
        }
        pieces.push(gk15(f, len, worst.a, mid, &mut buf));
        pieces.push(gk15(f, len, mid, worst.b, &mut buf));
    }
}

/// Scalars that can be integrated on a grid.
pub trait Scalar: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Tensor-product Gauss–Legendre grid on a box inside a chart.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    chart: Chart,
    bounds: Vec<(f64, f64)>,
    counts: Vec<usize>,
}

impl QuadratureGrid {
    pub fn new(chart: Chart, bounds: Vec<(f64, f64)>, counts: Vec<usize>) -> Result<Self> {
        crate::error::check_dim(chart.dim(), bounds.len())?;
        crate::error::check_dim(chart.dim(), counts.len())?;
        for (k, ((lo, hi), &(clo, chi))) in bounds.iter().zip(chart.bounds()).enumerate() {
            if !(lo < hi) || counts[k] == 0 {
                return Err(Error::Input(format!("empty grid axis {k}")));
            }
            if *lo < clo - 1e-12 || *hi > chi + 1e-12 {
                return Err(Error::Domain(vec![*lo, *hi]));
            }
        }
        Ok(Self { chart, bounds, counts })
    }

    /// Whole chart box with the given node counts (periodic axes span one period).
    pub fn full(chart: Chart, counts: Vec<usize>) -> Result<Self> {
        let bounds = (0..chart.dim())
            .map(|k| {
                if chart.is_periodic(k) {
                    (0.0, 2.0 * std::f64::consts::PI)
                } else {
                    chart.bounds()[k]
                }
            })
            .collect();
        Self::new(chart, bounds, counts)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// The next refinement level: twice the nodes along every axis.
    pub fn refined(&self) -> Self {
        Self { counts: self.counts.iter().map(|c| 2 * c).collect(), ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Chart coordinates and weight (chart volume times measure density) of node `i`.
    pub fn node(&self, i: usize) -> Result<(Vec<f64>, f64)> {
        let mut rem = i;
        let mut u = Vec::with_capacity(self.counts.len());
        let mut w = 1.0;
        for (k, &c) in self.counts.iter().enumerate().rev() {
            let j = rem % c;
            rem /= c;
            let rule = gauss_legendre(c);
            let (lo, hi) = self.bounds[k];
            let h = 0.5 * (hi - lo);
            u.push(0.5 * (hi + lo) + h * rule.0[j]);
            w *= h * rule.1[j];
        }
        u.reverse();
        let density = self.chart.measure_density(&u)?;
        Ok((u, w * density))
    }

    /// `Σ_i w_i f(x_i)` over the grid nodes with pairwise reduction.
    pub fn sum<T: Scalar>(&self, f: &(dyn Fn(&[f64]) -> T + Sync)) -> Result<T> {
        let terms = par::map_indexed(self.len(), |i| -> Result<T> {
            let (u, w) = self.node(i)?;
            let x = self.chart.embed_unchecked(&u);
            let v = f(&x);
            if !v.magnitude().is_finite() {
                return Err(Error::NonFinite(x));
            }
            Ok(v * w)
        });
        let terms: Vec<T> = terms.into_iter().collect::<Result<_>>()?;
        Ok(par::pairwise_sum(&terms))
    }
}

/// Integral with a one-step refinement error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    /// Set when the refinement changes the value by more than 1e-3 of its size.
    pub under_resolved: bool,
}

/// Integrates `f` against `ω` on `grid` and on its refinement.
pub fn integrate<T: Scalar>(f: &(dyn Fn(&[f64]) -> T + Sync), grid: &QuadratureGrid) -> Result<Estimate<T>> {
    let coarse = grid.sum(f)?;
    let fine = grid.refined().sum(f)?;
    let diff = (fine + coarse * -1.0).magnitude();
    let scale = fine.magnitude().max(coarse.magnitude());
    let under_resolved = diff > 1e-3 * scale || (coarse.magnitude() == 0.0 && fine.magnitude() > 0.0);
    Ok(Estimate { value: fine, error: diff, under_resolved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::QuadraticSpace;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 33, 128] {
            let (x, w) = gl_on(0.0, 2.0, n);
            let deg = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((s - exact).abs() < 1e-12 * exact, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_near_pole() {
        let eps = 1e-4;
        let mut f = |x: f64, out: &mut [Complex64]| out[0] = 1.0 / Complex64::new(x, -eps);
        let r = adaptive(&mut f, 1, &[-1.0, 0.0, 2.0], &AdaptiveOpts::default());
        let exact = Complex64::new(2.0, -eps).ln() - Complex64::new(-1.0, -eps).ln();
        assert!((r.value[0] - exact).norm() < 1e-10, "{:?} vs {exact}", r.value[0]);
        assert!(r.converged);
    }

    #[test]
    fn sphere_mass() {
        let chart = Chart::standard(QuadraticSpace::sphere(3).unwrap()).unwrap();
        let grid = QuadratureGrid::full(chart, vec![32, 64]).unwrap();
        let e = integrate(&|_x: &[f64]| 1.0, &grid).unwrap();
        assert!((e.value - 8.0 * std::f64::consts::PI).abs() < 1e-10);
        assert!(e.error < 1e-10);
        let z = integrate(&|_x: &[f64]| 0.0, &grid).unwrap();
        assert_eq!(z.value, 0.0);
    }
}
