//! Seeded verification suites. Each returns one row per check; tolerances
//! are fixed here and echoed into every row.

use std::f64::consts::PI;

use horokit::constants::{reconstruction_constant, reconstruction_constant_printed, UNIMODULAR_CALIBRATION};
use horokit::cycles::{cycle_independence_check, fundamental_form_integral, geodesic_cycle, Family, FormOpts};
use horokit::geodesic::{tangent_frame, Sheet};
use horokit::group::{group_element, Mat};
use horokit::horo::{circle_action_spectrum, invert_hyperbolic, invert_sphere, CircleOpts, HoroOpts};
use horokit::pseudo::{
    brute_force_real_points, class_margin, classify_pseudo_horosphere, oracle_agrees, random_isotropic_section, Branch,
    OracleOpts, OracleVerdict, PseudoHorosphereClass,
};
use horokit::quadratic::lemma1_residual;
use horokit::section::Section;
use horokit::testfn::{real_harmonic, Atom, Bump, Profile, TestFunction};
use horokit::transform::{integral, radon_cauchy, ultrahyperbolic_residual, Mode, Resolution};
use horokit::QuadraticSpace;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::failure::{numerical, Failure};
use crate::output::Row;

pub const HOMOGENEITY_TOL: f64 = 1e-6;
pub const PDE_MIN_ORDER: f64 = 1.5;
/// The residual must exceed its propagated quadrature noise by this factor.
pub const PDE_NOISE_MARGIN: f64 = 10.0;
pub const LEMMA1_MIN_ORDER: f64 = 1.9;
pub const RECONSTRUCTION_TOL: f64 = 1e-3;
pub const CALIBRATION_SPREAD_TOL: f64 = 1e-6;
pub const HOMOLOGY_TOL: f64 = 1e-3;
pub const HYPERBOLIC_INVERSION_TOL: f64 = 1e-2;
pub const OFF_SUPPORT_TOL: f64 = 1e-3;
pub const SPHERE_INVERSION_TOL: f64 = 1e-3;
pub const SHIFT_HALVING_TOL: f64 = 1e-3;
pub const CIRCLE_SELF_TOL: f64 = 1e-3;
pub const CIRCLE_LEAK_TOL: f64 = 1e-6;
pub const CLASS_BOUNDARY_EXCLUSION: f64 = 1e-6;
pub const RANDOM_SECTIONS: usize = 200;
pub const MEASURE_TOL: f64 = 1e-6;

/// Known suite names in acceptance order.
pub const SUITES: &[&str] = &[
    "homogeneity",
    "pde",
    "lemma1",
    "reconstruction",
    "cycles",
    "inversion-hyperbolic",
    "inversion-sphere",
    "circle",
    "classification",
    "measure",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    /// `(space label, row)`.
    pub rows: Vec<(String, Row)>,
}

impl SuiteReport {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|(_, r)| !r.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.failed() == 0
    }

    /// Rows whose `check` parameter equals `name`.
    pub fn check<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().map(|(_, r)| r).filter(move |r| r.params.iter().any(|(k, v)| k == "check" && v == name))
    }
}

pub fn run(name: &str, seed: u64) -> Result<SuiteReport, Failure> {
    let rows = match name {
        "homogeneity" => homogeneity(seed),
        "pde" => pde(seed),
        "lemma1" => lemma1(seed),
        "reconstruction" => reconstruction(seed),
        "cycles" => cycles(seed),
        "inversion-hyperbolic" => inversion_hyperbolic(seed),
        "inversion-sphere" => inversion_sphere(seed),
        "circle" => circle(seed),
        "classification" => classification(seed),
        "measure" => measure(seed),
        _ => return Err(Failure::Config(format!("unknown suite {name:?}; known: {}", SUITES.join(", ")))),
    }
    .map_err(numerical)?;
    Ok(SuiteReport { suite: name.into(), rows })
}

type Rows = horokit::Result<Vec<(String, Row)>>;

pub fn space_label(s: &QuadraticSpace) -> String {
    format!("X({},{})", s.p(), s.q())
}

/// Independent streams per suite from one user seed.
fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn s(v: impl ToString) -> String {
    v.to_string()
}

fn riemannian() -> [QuadraticSpace; 2] {
    [QuadraticSpace::hyperbolic(3).expect("valid"), QuadraticSpace::sphere(3).expect("valid")]
}

/// Base points used wherever a suite needs a fixed point off the pole.
fn base_point(space: &QuadraticSpace) -> Vec<f64> {
    if space.q() == 0 {
        vec![0.0, 0.6, 0.8]
    } else {
        vec![1.25f64.sqrt(), 0.5, 0.0]
    }
}

/// The point at geodesic distance `dist` from `c` in direction angle `angle`.
fn point_near(space: &QuadraticSpace, c: &[f64], dist: f64, angle: f64) -> horokit::Result<Vec<f64>> {
    let sheet = Sheet::of(space)?;
    let t = tangent_frame(space, c)?;
    let (ch, sh) = sheet.cs(dist);
    let (sa, ca) = angle.sin_cos();
    Ok((0..3).map(|j| ch * c[j] + sh * (ca * t[0][j] + sa * t[1][j])).collect())
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r > 0.1 && r <= 1.0 {
            return v.iter().map(|a| a / r).collect();
        }
    }
}

fn reference_bump(space: QuadraticSpace) -> horokit::Result<TestFunction> {
    TestFunction::bump(space, base_point(&space), 0.9)
}

fn random_real_section(space: QuadraticSpace, rng: &mut ChaCha8Rng) -> horokit::Result<Section> {
    let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0) + 1.2];
    Section::real(space, &xi, rng.gen_range(-0.5..0.5))
}

fn homogeneity(seed: u64) -> Rows {
    let mut rng = rng(seed, 1);
    let res = Resolution::default();
    let mut rows = Vec::new();
    for space in riemannian() {
        let f = reference_bump(space)?;
        for k in 0..10 {
            let base = random_real_section(space, &mut rng)?;
            let lam = rng.gen_range(0.3..3.0);
            let v = radon_cauchy(&f, &base, &Mode::Auto, &res)?;
            let w = radon_cauchy(&f, &base.scaled(lam), &Mode::Auto, &res)?;
            let dev = (w.value * lam - v.value).norm() / v.value.norm();
            let row = Row::new(&[("check", s("scaling")), ("case", s(k)), ("lambda", format!("{lam:.6}"))], w.value * lam, w.error_estimate * lam)
                .verdict(dev, HOMOGENEITY_TOL, dev <= HOMOGENEITY_TOL)
                .with_detail(json!({ "unscaled": [v.value.re, v.value.im], "p": base.p().re, "xi": base.xi() }));
            rows.push((space_label(&space), row));
        }
    }
    Ok(rows)
}

fn pde(seed: u64) -> Rows {
    let mut rng = rng(seed, 2);
    let res = Resolution::default();
    let steps = [0.2, 0.1, 0.05];
    let mut rows = Vec::new();
    for space in riemannian() {
        let f = reference_bump(space)?;
        for k in 0..3 {
            let sec = random_real_section(space, &mut rng)?;
            let r = steps
                .iter()
                .map(|&h| ultrahyperbolic_residual(&f, &sec, h, &Mode::Auto, &res))
                .collect::<horokit::Result<Vec<_>>>()?;
            let order = r.windows(2).map(|w| (w[0].value.norm() / w[1].value.norm()).log2()).fold(f64::INFINITY, f64::min);
            let last = r[r.len() - 1];
            let above = last.value.norm() > PDE_NOISE_MARGIN * last.noise;
            let row = Row::new(&[("check", s("order")), ("case", s(k))], last.value, last.noise)
                .verdict(order, PDE_MIN_ORDER, above && order >= PDE_MIN_ORDER)
                .with_detail(json!({
                    "h": steps,
                    "residual": r.iter().map(|x| x.value.norm()).collect::<Vec<_>>(),
                    "noise": r.iter().map(|x| x.noise).collect::<Vec<_>>(),
                }));
            rows.push((space_label(&space), row));
        }
    }
    Ok(rows)
}

/// A smooth field from a random linear part and three plane waves.
fn random_field(rng: &mut ChaCha8Rng, n: usize) -> impl Fn(&[f64]) -> Vec<f64> {
    let lin: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let waves: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..3)
        .map(|_| {
            let k: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let amp: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (k, amp, rng.gen_range(0.0..6.0))
        })
        .collect();
    move |x: &[f64]| {
        (0..n)
            .map(|j| {
                let l: f64 = (0..n).map(|k| lin[j * n + k] * x[k]).sum();
                let w: f64 = waves.iter().map(|(k, a, ph)| a[j] * (k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + ph).sin()).sum();
                l + w
            })
            .collect()
    }
}

fn lemma1(seed: u64) -> Rows {
    let mut rng = rng(seed, 3);
    let steps = [0.08, 0.04, 0.02];
    let mut rows = Vec::new();
    for k in 0..10 {
        let a = random_field(&mut rng, 3);
        let xi0: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let frame: Vec<Vec<f64>> = (0..2).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let r = steps.iter().map(|&h| lemma1_residual(&a, &xi0, &frame, h).map(f64::abs)).collect::<horokit::Result<Vec<_>>>()?;
        let order = r.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
        let row = Row::new(&[("check", s("order")), ("field", s(k))], c(r[2]), 0.0)
            .verdict(order, LEMMA1_MIN_ORDER, order >= LEMMA1_MIN_ORDER)
            .with_detail(json!({ "h": steps, "residual": r }));
        rows.push(("R^3".to_string(), row));
    }
    Ok(rows)
}

/// Bump plus a modulated bump near `x`, so both parity parts are nonzero at `x`.
fn parity_function(space: QuadraticSpace, x: &[f64], rng: &mut ChaCha8Rng) -> horokit::Result<TestFunction> {
    let c1 = point_near(&space, x, rng.gen_range(0.0..0.2), rng.gen_range(0.0..2.0 * PI))?;
    let c2 = point_near(&space, x, rng.gen_range(0.0..0.2), rng.gen_range(0.0..2.0 * PI))?;
    let dir = random_unit(rng);
    let bump = |center: Vec<f64>, radius: f64| Bump { center, radius, profile: Profile::Invariant };
    TestFunction::new(
        space,
        vec![
            (1.0, Atom::Bump(bump(c1, rng.gen_range(0.8..1.0)))),
            (rng.gen_range(0.3..0.8), Atom::Modulated { bump: bump(c2, rng.gen_range(0.8..1.0)), direction: dir }),
        ],
    )
}

fn reconstruction(seed: u64) -> Rows {
    let mut rng = rng(seed, 4);
    let opts = FormOpts::default();
    let c_realized = reconstruction_constant(3) / UNIMODULAR_CALIBRATION;
    let c_printed = reconstruction_constant_printed(3);
    let mut rows = Vec::new();
    for space in riemannian() {
        let label = space_label(&space);
        let x = base_point(&space);
        let cyc = geodesic_cycle(space, &x)?;
        let mut calibrations = Vec::new();
        let mut printed = Vec::new();
        for k in 0..5 {
            let f = parity_function(space, &x, &mut rng)?;
            let mirror = f.reflected();
            let fx = f.eval(&x);
            let mut total = c(0.0);
            for (part, sign) in [("even", 1.0), ("odd", -1.0)] {
                let g = f.combine(0.5, &mirror, 0.5 * sign)?;
                let v = fundamental_form_integral(&g, &cyc, &opts)?;
                total += v.total.value;
                let err = v.total.error_estimate / reconstruction_constant(3).norm();
                let row = Row::new(&[("check", s(part)), ("function", s(k))], v.reconstruction, err)
                    .against(g.eval(&x), fx.abs(), RECONSTRUCTION_TOL)
                    .with_detail(json!({ "x_term": [v.x_term.re, v.x_term.im], "u_term": [v.u_term.re, v.u_term.im] }));
                rows.push((label.clone(), row));
            }
            let observed = total / fx;
            calibrations.push(observed / c_realized);
            printed.push(observed / c_printed);
        }
        let spread = calibrations.iter().map(|a| (a - calibrations[0]).norm()).fold(0.0, f64::max);
        let off = calibrations.iter().map(|a| (a - UNIMODULAR_CALIBRATION).norm()).fold(0.0, f64::max);
        let row = Row::new(&[("check", s("calibration")), ("function", s("all"))], calibrations[0], spread)
            .verdict(spread.max(off), CALIBRATION_SPREAD_TOL, spread <= CALIBRATION_SPREAD_TOL && off <= CALIBRATION_SPREAD_TOL)
            .with_detail(json!({ "factors": calibrations.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>() }));
        rows.push((label.clone(), row));
        // against the printed constant the residual factor must be unimodular
        let modulus_gap = printed.iter().map(|r| (r.norm() - 1.0).abs()).fold(0.0, f64::max);
        let row = Row::new(&[("check", s("printed_constant")), ("function", s("all"))], printed[0], 0.0)
            .verdict(modulus_gap, CALIBRATION_SPREAD_TOL, modulus_gap <= CALIBRATION_SPREAD_TOL)
            .with_detail(json!({
                "printed": [c_printed.re, c_printed.im],
                "realized": [c_realized.re, c_realized.im],
                "ratios": printed.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
            }));
        rows.push((label, row));
    }
    Ok(rows)
}

fn cycles(seed: u64) -> Rows {
    let mut rng = rng(seed, 5);
    let opts = FormOpts::default();
    let params = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut rows = Vec::new();
    for space in riemannian() {
        let x = base_point(&space);
        let centre = point_near(&space, &x, rng.gen_range(0.0..0.3), rng.gen_range(0.0..2.0 * PI))?;
        let f = TestFunction::bump(space, centre, rng.gen_range(0.8..1.0))?;
        let fams: Vec<Family> = params
            .iter()
            .map(|&t| match (space.q(), t) {
                (_, 0.0) => Family::Geodesic,
                (0, t) => Family::Sphere { delta: t },
                (_, t) => Family::Hyperbolic { rho: t },
            })
            .collect();
        let rep = cycle_independence_check(&f, &x, &fams, &opts)?;
        let reference = rep.values[0].total.value;
        for (t, v) in params.iter().zip(&rep.values) {
            let dev = (v.total.value - reference).norm() / reference.norm();
            let name = if space.q() == 0 { "delta" } else { "rho" };
            let row = Row::new(&[("check", s("deformation")), ("parameter", format!("{name}={t}"))], v.total.value, v.total.error_estimate)
                .verdict(dev, HOMOLOGY_TOL, dev <= HOMOLOGY_TOL)
                .with_detail(json!({ "regularization": format!("{:?}", v.total.regularization) }));
            rows.push((space_label(&space), row));
        }
    }
    Ok(rows)
}

/// Peak of the unit mollifier, `e^{-1}`.
fn bump_peak() -> f64 {
    (-1.0f64).exp()
}

fn inversion_hyperbolic(seed: u64) -> Rows {
    let mut rng = rng(seed, 6);
    let space = QuadraticSpace::hyperbolic(3)?;
    let sheet = Sheet::Hyperbolic;
    let opts = HoroOpts::default();
    let mut rows = Vec::new();
    for k in 0..5 {
        let centre = point_near(&space, &[1.0, 0.0, 0.0], rng.gen_range(0.0..0.6), rng.gen_range(0.0..2.0 * PI))?;
        let radius = rng.gen_range(0.7..1.0);
        let f = TestFunction::bump(space, centre.clone(), radius)?;
        let reach = sheet.geodesic_radius(radius);
        let mut points: Vec<(&str, Vec<f64>)> = Vec::new();
        for _ in 0..3 {
            points.push(("inside", point_near(&space, &centre, rng.gen_range(0.0..0.6) * reach, rng.gen_range(0.0..2.0 * PI))?));
        }
        points.push(("outside", point_near(&space, &centre, rng.gen_range(1.2..1.6) * reach, rng.gen_range(0.0..2.0 * PI))?));
        for (j, (kind, x)) in points.into_iter().enumerate() {
            let r = invert_hyperbolic(&f, &x, &opts)?;
            let truth = f.eval(&x);
            let tol = if kind == "inside" { HYPERBOLIC_INVERSION_TOL } else { OFF_SUPPORT_TOL };
            let row = Row::new(&[("check", s(kind)), ("bump", s(k)), ("point", s(j))], r.value, r.error_estimate)
                .against(truth, bump_peak(), tol)
                .with_detail(json!({ "x": x }));
            rows.push((space_label(&space), row));
        }
    }
    Ok(rows)
}

/// A point where `|Y_ℓ^m|` is at least a quarter of its pointwise bound.
fn harmonic_point(degree: usize, order: i64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let bound = ((2 * degree + 1) as f64 / (4.0 * PI)).sqrt();
    loop {
        let x = random_unit(rng);
        if real_harmonic(degree, order, &x).abs() >= 0.25 * bound {
            return x;
        }
    }
}

fn inversion_sphere(seed: u64) -> Rows {
    let mut rng = rng(seed, 7);
    let space = QuadraticSpace::sphere(3)?;
    let opts = HoroOpts::default();
    let halved = HoroOpts { shift0: opts.shift0 * 0.5, ..opts.clone() };
    let mut cases: Vec<(String, TestFunction, Vec<Vec<f64>>)> = Vec::new();
    for _ in 0..3 {
        let centre = random_unit(&mut rng);
        let radius = rng.gen_range(0.8..1.1);
        let reach = Sheet::Sphere.geodesic_radius(radius);
        let pts = (0..3)
            .map(|_| point_near(&space, &centre, rng.gen_range(0.0..0.5) * reach, rng.gen_range(0.0..2.0 * PI)))
            .collect::<horokit::Result<_>>()?;
        cases.push((format!("bump r={radius:.3}"), TestFunction::bump(space, centre, radius)?, pts));
    }
    for _ in 0..2 {
        let degree = rng.gen_range(1..=3usize);
        let order = rng.gen_range(-(degree as i64)..=degree as i64);
        let pts = (0..3).map(|_| harmonic_point(degree, order, &mut rng)).collect();
        cases.push((format!("Y({degree},{order})"), TestFunction::harmonic(degree, order)?, pts));
    }
    let mut rows = Vec::new();
    for (k, (name, f, pts)) in cases.iter().enumerate() {
        for (j, x) in pts.iter().enumerate() {
            let r = invert_sphere(f, x, &opts)?;
            let h = invert_sphere(f, x, &halved)?;
            let truth = f.eval(x);
            let params = [("function", format!("{k}:{name}")), ("point", s(j))];
            let row = Row::new(&[[("check", s("value"))].as_slice(), &params].concat(), r.value, r.error_estimate)
                .against(truth, truth.abs(), SPHERE_INVERSION_TOL)
                .with_detail(json!({ "x": x }));
            rows.push((space_label(&space), row));
            let change = (h.value - r.value).norm() / r.value.norm();
            let row = Row::new(&[[("check", s("shift_halving"))].as_slice(), &params].concat(), h.value, h.error_estimate)
                .verdict(change, SHIFT_HALVING_TOL, change <= SHIFT_HALVING_TOL)
                .with_detail(json!({ "shift0": [opts.shift0, halved.shift0] }));
            rows.push((space_label(&space), row));
        }
    }
    Ok(rows)
}

fn circle(seed: u64) -> Rows {
    let mut rng = rng(seed, 8);
    let opts = CircleOpts::default();
    let space = QuadraticSpace::sphere(3)?;
    let mut rows = Vec::new();
    for degree in 0..=4usize {
        let order = rng.gen_range(-(degree as i64)..=degree as i64);
        let f = TestFunction::harmonic(degree, order)?;
        let pts: Vec<Vec<f64>> = (0..2).map(|_| harmonic_point(degree, order, &mut rng)).collect();
        let targets: Vec<usize> = (0..=4).collect();
        let spectrum = circle_action_spectrum(&f, &targets, &pts, &opts)?;
        for &target in &targets {
            for (j, (x, per)) in pts.iter().zip(&spectrum).enumerate() {
                let r = &per[target];
                let truth = real_harmonic(degree, order, x);
                let params = [("input", format!("Y({degree},{order})")), ("projected", s(target)), ("point", s(j))];
                let row = if target == degree {
                    Row::new(&[[("check", s("self"))].as_slice(), &params].concat(), r.value, r.error_estimate)
                        .against(truth, truth.abs(), CIRCLE_SELF_TOL)
                } else {
                    let leak = r.value.norm() / truth.abs();
                    Row::new(&[[("check", s("leakage"))].as_slice(), &params].concat(), r.value, r.error_estimate)
                        .verdict(leak, CIRCLE_LEAK_TOL, leak <= CIRCLE_LEAK_TOL)
                };
                rows.push((space_label(&space), row));
            }
        }
    }
    Ok(rows)
}

fn canonical(space: QuadraticSpace, lam: f64) -> horokit::Result<Section> {
    Section::complex(space, &[lam, 0.0, 0.0, 0.0], &[0.0, lam, 0.0, 0.0], c(1.0))
}

fn classification(seed: u64) -> Rows {
    let mut rng = rng(seed, 9);
    let space = QuadraticSpace::pseudo(4)?;
    let label = space_label(&space);
    let oracle = OracleOpts::default();
    let mut rows = Vec::new();
    let stated = [
        ("lambda>1", canonical(space, 1.5)?, PseudoHorosphereClass::Interior { branch: Some(Branch::Plus) }),
        (
            "lambda=1",
            canonical(space, 1.0)?,
            PseudoHorosphereClass::Tangent { point: vec![1.0, 0.0, 0.0, 0.0], branch: Branch::Plus },
        ),
        (
            "box<0",
            Section::complex(space, &[0.0, 0.0, 0.7, 0.0], &[0.0, 0.0, 0.0, 0.7], Complex64::new(0.3, -0.2))?,
            PseudoHorosphereClass::Infinite,
        ),
    ];
    for (name, sec, expected) in stated {
        let got = classify_pseudo_horosphere(&sec)?;
        let report = brute_force_real_points(&sec, &oracle)?;
        let ok = got == expected && oracle_agrees(&got, &report);
        let row = Row::new(&[("check", s("canonical")), ("section", s(name)), ("class", s(got.name()))], c(report.min_residual), 0.0)
            .verdict(if ok { 0.0 } else { 1.0 }, 0.0, ok)
            .with_detail(json!({ "class": format!("{got:?}"), "expected": format!("{expected:?}"), "oracle": format!("{:?}", report.verdict) }));
        rows.push((label.clone(), row));
    }
    let mut uniform = || rng.gen::<f64>();
    for k in 0..RANDOM_SECTIONS {
        let sec = random_isotropic_section(space, &mut uniform)?;
        let class = classify_pseudo_horosphere(&sec)?;
        let margin = class_margin(&sec)?;
        let (check, ok, verdict) = if margin < CLASS_BOUNDARY_EXCLUSION {
            ("excluded", true, None)
        } else {
            let report = brute_force_real_points(&sec, &oracle)?;
            ("random", oracle_agrees(&class, &report), Some(report))
        };
        let residual = verdict.as_ref().map_or(f64::NAN, |r| r.min_residual);
        let row = Row::new(&[("check", s(check)), ("section", s(k)), ("class", s(class.name()))], c(residual), 0.0)
            .verdict(margin, CLASS_BOUNDARY_EXCLUSION, ok)
            .with_detail(json!({
                "oracle": verdict.map(|r| match r.verdict {
                    OracleVerdict::NoRealPoints => "none".to_string(),
                    OracleVerdict::Localized { point } => format!("localized at {point:?}"),
                    OracleVerdict::Extended => "extended".to_string(),
                }),
            }));
        rows.push((label.clone(), row));
    }
    Ok(rows)
}

fn random_element(space: &QuadraticSpace, rng: &mut ChaCha8Rng, max_boost: f64) -> horokit::Result<Mat> {
    let n = space.n();
    let mut g = Mat::identity(n);
    for _ in 0..6 {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let t = if space.delta(i) == space.delta(j) { rng.gen_range(-3.0..3.0) } else { rng.gen_range(-max_boost..max_boost) };
        g = g.mul(&group_element(space, (i, j), t)?);
    }
    Ok(g)
}

fn measure(seed: u64) -> Rows {
    let mut rng = rng(seed, 10);
    let mut rows = Vec::new();
    for space in riemannian() {
        let x = base_point(&space);
        for k in 0..3 {
            let centre = point_near(&space, &x, rng.gen_range(0.0..0.4), rng.gen_range(0.0..2.0 * PI))?;
            let f = TestFunction::bump(space, centre, rng.gen_range(0.7..1.0))?;
            let base = integral(&f, 64)?;
            for m in 0..4 {
                let g = random_element(&space, &mut rng, 0.4)?;
                let moved = integral(&f.composed(&g)?, 64)?;
                let dev = (moved.value - base.value).abs() / base.value.abs();
                let row = Row::new(&[("check", s("invariance")), ("bump", s(k)), ("element", s(m))], c(moved.value), moved.error)
                    .verdict(dev, MEASURE_TOL, dev <= MEASURE_TOL)
                    .with_detail(json!({ "reference": base.value }));
                rows.push((space_label(&space), row));
            }
        }
    }
    Ok(rows)
}
