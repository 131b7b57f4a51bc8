use horokit::error::Error;
use horokit::horo::{horo_transform, HoroOpts};
use horokit::quadratic::QuadraticSpace;
use horokit::section::{Regularization, Section};
use horokit::testfn::TestFunction;
use horokit::transform::{radon_cauchy, radon_cauchy_dp, ultrahyperbolic_residual, Mode, Resolution};
use num_complex::Complex64;
use proptest::prelude::*;

fn hyperbolic_bump() -> TestFunction {
    TestFunction::bump(QuadraticSpace::hyperbolic(3).unwrap(), vec![1.25f64.sqrt(), 0.5, 0.0], 0.9).unwrap()
}

fn sphere_bump() -> TestFunction {
    TestFunction::bump(QuadraticSpace::sphere(3).unwrap(), vec![0.0, 0.6, 0.8], 0.9).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn homogeneity_on_real_sections(
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0,
        p in -0.5f64..0.5, lam in 0.3f64..3.0, sphere in any::<bool>(),
    ) {
        let f = if sphere { sphere_bump() } else { hyperbolic_bump() };
        let s = f.space();
        let base = Section::real(*s, &[a, b, c + 1.2], p).unwrap();
        let res = Resolution::default();
        let v = radon_cauchy(&f, &base, &Mode::Auto, &res).unwrap();
        let w = radon_cauchy(&f, &base.scaled(lam), &Mode::Auto, &res).unwrap();
        prop_assert!(rel(w.value * lam, v.value) <= 1e-6, "{} vs {}", w.value * lam, v.value);
    }

    #[test]
    fn homogeneity_on_interior_horospheres(a in 0.1f64..0.9, t in 0.0f64..std::f64::consts::TAU, lam in 0.3f64..3.0) {
        let f = sphere_bump();
        let s = *f.space();
        let (st, ct) = t.sin_cos();
        let sec = Section::complex(s, &[a * ct, a * st, 0.0], &[0.0, 0.0, a], Complex64::new(1.0, 0.0)).unwrap();
        let opts = HoroOpts::default();
        let v = horo_transform(&f, &sec, &opts).unwrap();
        let w = horo_transform(&f, &sec.scaled(lam), &opts).unwrap();
        prop_assert!(rel(w.value.value * lam, v.value.value) <= 1e-9);
        // ∂_p picks up one more power
        prop_assert!(rel(w.stack[1].value * lam * lam, v.stack[1].value) <= 1e-9);
    }
}

#[test]
fn opposite_regularizations_are_conjugate() {
    let f = hyperbolic_bump();
    let sec = Section::real(*f.space(), &[0.3, 1.0, 0.2], 0.4).unwrap();
    let res = Resolution::default();
    for eps in [0.1, 0.02] {
        let up = radon_cauchy(&f, &sec, &Mode::FixedEps(eps), &res).unwrap();
        let down = radon_cauchy(&f, &sec, &Mode::FixedEps(-eps), &res).unwrap();
        assert!(rel(down.value, up.value.conj()) < 1e-10);
        assert_eq!(up.regularization, Regularization::FixedEps(eps));
    }
}

#[test]
fn boundary_value_engines_agree() {
    let f = hyperbolic_bump();
    let sec = Section::real(*f.space(), &[0.3, 1.0, 0.2], 0.4).unwrap();
    let res = Resolution::default();
    let pv = radon_cauchy(&f, &sec, &Mode::PvDelta, &res).unwrap();
    let ex = radon_cauchy(&f, &sec, &Mode::eps_default(), &res).unwrap();
    assert!(rel(ex.value, pv.value) < 1e-6, "{} vs {}", ex.value, pv.value);
    assert!(pv.value.im.abs() > 0.1, "the δ layer is visible");
}

#[test]
fn off_support_sections_have_no_delta_layer() {
    let f = hyperbolic_bump();
    // ⟨ξ, u⟩ − p stays negative on the support
    let sec = Section::real(*f.space(), &[1.0, 0.0, 0.0], 3.5).unwrap();
    let res = Resolution::default();
    let direct = radon_cauchy(&f, &sec, &Mode::Direct, &res).unwrap();
    let pv = radon_cauchy(&f, &sec, &Mode::PvDelta, &res).unwrap();
    assert!(direct.value.im.abs() < 1e-14);
    assert!(rel(pv.value, direct.value) < 1e-9);
}

#[test]
fn zero_function_and_linearity() {
    let s = QuadraticSpace::hyperbolic(3).unwrap();
    let sec = Section::real(s, &[0.3, 1.0, 0.2], 0.4).unwrap();
    let res = Resolution::default();
    let z = radon_cauchy(&TestFunction::zero(s), &sec, &Mode::PvDelta, &res).unwrap();
    assert_eq!(z.value, Complex64::new(0.0, 0.0));
    let f = hyperbolic_bump();
    let g = TestFunction::bump(s, vec![(1.0f64 + 0.09 + 0.04).sqrt(), 0.3, 0.2], 0.7).unwrap();
    let h = f.combine(2.0, &g, -0.5).unwrap();
    let vf = radon_cauchy(&f, &sec, &Mode::PvDelta, &res).unwrap().value;
    let vg = radon_cauchy(&g, &sec, &Mode::PvDelta, &res).unwrap().value;
    let vh = radon_cauchy(&h, &sec, &Mode::PvDelta, &res).unwrap().value;
    assert!(rel(vh, vf * 2.0 - vg * 0.5) < 1e-8);
}

#[test]
fn higher_derivatives_match_differences_of_lower_ones() {
    let f = sphere_bump();
    let sec = Section::complex(*f.space(), &[0.3, 0.0, 0.0], &[0.0, 0.3, 0.0], Complex64::new(1.0, 0.0)).unwrap();
    let res = Resolution::default();
    let h = 1e-4;
    let d1 = radon_cauchy_dp(&f, &sec, 1, &Mode::Direct, &res).unwrap().value;
    let d2 = radon_cauchy_dp(&f, &sec, 2, &Mode::Direct, &res).unwrap().value;
    let at = |p: f64| radon_cauchy_dp(&f, &sec.with_p(Complex64::new(p, 0.0)), 1, &Mode::Direct, &res).unwrap().value;
    let fd = (at(1.0 + h) - at(1.0 - h)) / (2.0 * h);
    assert!(rel(fd, d2) < 1e-6);
    assert!(d1.norm() > 0.0);
}

#[test]
fn ultrahyperbolic_residual_decays_quadratically() {
    let f = hyperbolic_bump();
    let sec = Section::real(*f.space(), &[0.3, 1.0, 0.2], 0.4).unwrap();
    let res = Resolution::default();
    let r: Vec<_> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| ultrahyperbolic_residual(&f, &sec, h, &Mode::Auto, &res).unwrap())
        .collect();
    for w in r.windows(2) {
        assert!(w[1].value.norm() > 10.0 * w[1].noise, "residual sits on the noise floor");
        let order = (w[0].value.norm() / w[1].value.norm()).log2();
        assert!(order >= 1.5, "order {order}");
    }
}

#[test]
fn preconditions_are_enforced() {
    let f = hyperbolic_bump();
    let s = *f.space();
    let crossing = Section::real(s, &[0.3, 1.0, 0.2], 0.4).unwrap();
    let res = Resolution::default();
    assert!(matches!(radon_cauchy(&f, &crossing, &Mode::Direct, &res), Err(Error::SingularKernel)));
    let complex = Section::complex(s, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], Complex64::new(1.0, 0.0)).unwrap();
    assert!(matches!(ultrahyperbolic_residual(&f, &complex, 0.1, &Mode::Auto, &res), Err(Error::Precondition(_))));
    let not_iso = Section::complex(s, &[1.0, 0.0, 0.0], &[0.0, 0.5, 0.0], Complex64::new(1.0, 0.0)).unwrap();
    assert!(matches!(horo_transform(&f, &not_iso, &HoroOpts::default()), Err(Error::Precondition(_))));
}
