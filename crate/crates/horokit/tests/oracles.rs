//! Values checked against brute-force sums written here, independently of
//! the library's quadrature engines, then frozen.

use std::f64::consts::{PI, TAU};

use horokit::horo::{horo_transform, HoroOpts};
use horokit::pseudo::{forward_transform, PseudoOpts, TransformComponent};
use horokit::quadratic::QuadraticSpace;
use horokit::section::Section;
use horokit::testfn::{mollifier, TestFunction};
use horokit::transform::{integral, Resolution};
use num_complex::Complex64;

/// Gauss–Legendre nodes on `[a, b]` by Newton iteration on `P_n`.
fn gl(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w)
        })
        .collect()
}

/// `∫_{S²} g ω` with `ω = 2 sin θ dθ dφ`, polar axis along `axis`.
fn sphere_sum(axis: [f64; 3], g: impl Fn([f64; 3]) -> Complex64) -> Complex64 {
    // orthonormal frame around the axis
    let t = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = t[0] * axis[0] + t[1] * axis[1] + t[2] * axis[2];
    let mut e1 = [t[0] - d * axis[0], t[1] - d * axis[1], t[2] - d * axis[2]];
    let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|v| *v /= l);
    let e2 = [
        axis[1] * e1[2] - axis[2] * e1[1],
        axis[2] * e1[0] - axis[0] * e1[2],
        axis[0] * e1[1] - axis[1] * e1[0],
    ];
    let nphi = 600;
    let mut acc = Complex64::new(0.0, 0.0);
    for (th, w) in gl(300, 0.0, PI) {
        let (s, c) = th.sin_cos();
        for k in 0..nphi {
            let phi = TAU * k as f64 / nphi as f64;
            let u = [0, 1, 2].map(|j| c * axis[j] + s * (phi.cos() * e1[j] + phi.sin() * e2[j]));
            acc += g(u) * (2.0 * s * w * TAU / nphi as f64);
        }
    }
    acc
}

#[test]
fn sphere_interior_horosphere_value() {
    // ξ = (0.5, 0, 0), η = (0, 0.5, 0), p = 1: Δ(ξ) = Δ(η) = 0.25, no real points
    const FROZEN: f64 = -1.018_243_372_286;
    let s = QuadraticSpace::sphere(3).unwrap();
    let c = [0.6, 0.0, 0.8];
    let f = TestFunction::bump(s, c.to_vec(), 0.9).unwrap();
    let sec = Section::complex(s, &[0.5, 0.0, 0.0], &[0.0, 0.5, 0.0], Complex64::new(1.0, 0.0)).unwrap();
    let brute = sphere_sum(c, |u| {
        let s2 = (2.0 - 2.0 * (u[0] * c[0] + u[1] * c[1] + u[2] * c[2])) / 0.81;
        let z = Complex64::new(0.5 * u[0], 0.5 * u[1]) - 1.0;
        mollifier(s2) / z
    });
    assert!((brute.re - FROZEN).abs() < 1e-9 && brute.im.abs() < 1e-9, "{brute}");
    let v = horo_transform(&f, &sec, &HoroOpts::default()).unwrap();
    assert!((v.value.value.re - FROZEN).abs() < 1e-9 && v.value.value.im.abs() < 1e-9);
    assert!(v.value.error_estimate < 1e-8);
    // first p-derivative is the second-order moment
    let brute1 = sphere_sum(c, |u| {
        let s2 = (2.0 - 2.0 * (u[0] * c[0] + u[1] * c[1] + u[2] * c[2])) / 0.81;
        let z = Complex64::new(0.5 * u[0], 0.5 * u[1]) - 1.0;
        mollifier(s2) / (z * z)
    });
    assert!((v.stack[1].value - brute1).norm() < 1e-9);
}

#[test]
fn sphere_bump_mass() {
    const FROZEN: f64 = 0.755_750_077_198;
    let s = QuadraticSpace::sphere(3).unwrap();
    let c = [0.0, 0.6, 0.8];
    let f = TestFunction::bump(s, c.to_vec(), 0.9).unwrap();
    let brute = sphere_sum(c, |u| Complex64::new(f.eval(&u), 0.0)).re;
    assert!((brute - FROZEN).abs() < 1e-9, "{brute:.12}");
    let lib = integral(&f, 96).unwrap();
    assert!((lib.value - FROZEN).abs() < 1e-8, "{}", lib.value);
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    let mut a = m;
    let mut d = 1.0;
    for k in 0..4 {
        let p = (k..4).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        d *= a[k][k];
        for i in k + 1..4 {
            let r = a[i][k] / a[k][k];
            for j in k..4 {
                a[i][j] -= r * a[k][j];
            }
        }
    }
    d
}

#[test]
fn pseudo_interior_value() {
    // ξ = (1.5, 0, 0, 0), η = (0, 1.5, 0, 0), p = 1 on X_{2,2}: in Θ⁺
    const FROZEN: f64 = 1.140_466_68;
    let s = QuadraticSpace::pseudo(4).unwrap();
    let c = [(1.0f64 + 0.25 + 0.09).sqrt(), 0.0, 0.5, 0.3];
    let f = TestFunction::bump(s, c.to_vec(), 0.8).unwrap();
    let sec = Section::complex(s, &[1.5, 0.0, 0.0, 0.0], &[0.0, 1.5, 0.0, 0.0], Complex64::new(1.0, 0.0)).unwrap();
    // x = (r cos θ, r sin θ, y₁, y₂), r = √(1 + |y|²); ω = 3! |det(x, ∂_θ x, ∂_y₁ x, ∂_y₂ x)|
    let mut brute = Complex64::new(0.0, 0.0);
    let ys = gl(80, -1.0, 1.0);
    for (th, wt) in gl(80, -0.8, 0.8) {
        for &(a, wa) in &ys {
            for &(b, wb) in &ys {
                let (y1, y2) = (c[2] + a, c[3] + b);
                let r = (1.0 + y1 * y1 + y2 * y2).sqrt();
                let x = [r * th.cos(), r * th.sin(), y1, y2];
                let val = f.eval(&x);
                if val == 0.0 {
                    continue;
                }
                let dth = [-r * th.sin(), r * th.cos(), 0.0, 0.0];
                let d1 = [y1 / r * th.cos(), y1 / r * th.sin(), 1.0, 0.0];
                let d2 = [y2 / r * th.cos(), y2 / r * th.sin(), 0.0, 1.0];
                let dens = 6.0 * det4([x, dth, d1, d2]).abs();
                let z = Complex64::new(1.5 * x[0], 1.5 * x[1]) - 1.0;
                brute += val / z * dens * wt * wa * wb;
            }
        }
    }
    assert!((brute.re - FROZEN).abs() < 1e-7 && brute.im.abs() < 1e-9, "{brute}");
    let opts = PseudoOpts { res: Resolution { grid_nodes: 48, ..Resolution::default() }, ..PseudoOpts::default() };
    let v = forward_transform(&f, &sec, &opts).unwrap();
    assert_eq!(v.component, TransformComponent::Plus);
    assert!((v.value.value.re - FROZEN).abs() < 1e-7, "{}", v.value.value);
}
