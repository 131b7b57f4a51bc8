//! Parallel vs sequential execution of the three integration engines.
//! Without the `parallel` feature both variants run sequentially.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use horokit::horo::{invert_hyperbolic, HoroOpts};
use horokit::par::with_serial;
use horokit::pseudo::{forward_transform, PseudoOpts};
use horokit::quadratic::QuadraticSpace;
use horokit::section::Section;
use horokit::testfn::TestFunction;
use horokit::transform::{integral, radon_cauchy, Mode, Resolution};
use num_complex::Complex64;

fn variants<R>(c: &mut Criterion, group: &str, run: impl Fn() -> R) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10).measurement_time(Duration::from_secs(8));
    g.bench_function(BenchmarkId::new("parallel", ""), |b| b.iter(|| black_box(run())));
    g.bench_function(BenchmarkId::new("sequential", ""), |b| b.iter(|| with_serial(|| black_box(run()))));
    g.finish();
}

fn engines(c: &mut Criterion) {
    let hyp = QuadraticSpace::hyperbolic(3).unwrap();
    let bump = TestFunction::bump(hyp, vec![1.25f64.sqrt(), 0.5, 0.0], 0.9).unwrap();

    variants(c, "measure_grid", || integral(&bump, 64).unwrap().value);

    let real = Section::real(hyp, &[0.3, 1.0, 0.2], 0.4).unwrap();
    let res = Resolution::default();
    variants(c, "coarea_pv_delta", || radon_cauchy(&bump, &real, &Mode::PvDelta, &res).unwrap().value);

    let x = [1.25f64.sqrt(), 0.5, 0.0];
    let opts = HoroOpts::default();
    variants(c, "hyperbolic_inversion", || invert_hyperbolic(&bump, &x, &opts).unwrap().value);

    let pseudo = QuadraticSpace::pseudo(4).unwrap();
    let pb = TestFunction::bump(pseudo, vec![(1.0f64 + 0.25 + 0.09).sqrt(), 0.0, 0.5, 0.3], 0.8).unwrap();
    let interior = Section::new(pseudo, vec![Complex64::new(1.5, 0.0), Complex64::new(0.0, 1.5), 0.0.into(), 0.0.into()], 1.0.into())
        .unwrap();
    let popts = PseudoOpts::default();
    variants(c, "pseudo_interior_grid", || forward_transform(&pb, &interior, &popts).unwrap().value.value);
}

criterion_group!(benches, engines);
criterion_main!(benches);
