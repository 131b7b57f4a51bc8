//! The four commands: compute rows, render them, write them atomically.

use std::path::{Path, PathBuf};
use std::time::Instant;

use horokit::constants::reconstruction_constant;
use horokit::cycles::{fundamental_form_integral, geodesic_cycle};
use horokit::geodesic::Sheet;
use horokit::horo::{classify_sphere_horosphere, invert_hyperbolic, invert_sphere, Reconstruction, SphereHorosphereClass};
use horokit::pseudo::{brute_force_real_points, class_margin, classify_pseudo_horosphere, forward_transform, oracle_agrees, PseudoHorosphereClass};
use horokit::testfn::{Atom, TestFunction};
use horokit::transform::radon_cauchy;
use horokit::QuadraticSpace;
use num_complex::Complex64;
use serde_json::json;

use crate::config::{ExperimentConfig, InversionMethod};
use crate::failure::{numerical, Failure};
use crate::output::{self, Document, ResultRecord, Row};
use crate::suites::{self, space_label};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Transform,
    Invert,
    Classify,
    Verify { suite: String },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Invert => "invert",
            Command::Classify => "classify",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Rendered results, ready to be written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub stem: String,
    pub records: Vec<ResultRecord>,
    pub csv: String,
    pub json: String,
    pub svg: Option<String>,
}

impl Outcome {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| !r.pass).count()
    }
}

type Labelled = Vec<(String, Row)>;

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn is_pseudo(space: &QuadraticSpace) -> bool {
    space.p() >= 2 && space.q() >= 1
}

/// Runs a command and renders its outputs without touching the disk.
pub fn run(command: &Command, cfg: &ExperimentConfig, seed: u64) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let (rows, svg) = match command {
        Command::Transform => (transform(cfg, seed)?, None),
        Command::Invert => invert(cfg)?,
        Command::Classify => (classify(cfg, seed)?, None),
        Command::Verify { suite } => (suites::run(suite, seed)?.rows, None),
    };
    let hash = cfg.hash(seed);
    let records: Vec<ResultRecord> = rows.into_iter().map(|(space, r)| r.record(&cfg.experiment_id, &space, &hash)).collect();
    let doc = Document {
        experiment_id: &cfg.experiment_id,
        command: command.name(),
        config_hash: &hash,
        seed,
        config: cfg,
        wall_time_s: start.elapsed().as_secs_f64(),
        records: &records,
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Config(format!("cannot serialize results: {e}")))?;
    Ok(Outcome {
        stem: cfg.output.stem.clone().unwrap_or_else(|| cfg.experiment_id.clone()),
        csv: output::csv(&records),
        records,
        json,
        svg: svg.filter(|_| cfg.output.svg),
    })
}

/// Runs, writes `<stem>.csv`, `<stem>.json` and optionally `<stem>.svg` into
/// `out`, and turns failing verification checks into an error afterwards.
pub fn execute(command: &Command, cfg: &ExperimentConfig, seed: u64, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let outcome = run(command, cfg, seed)?;
    let mut files = vec![(format!("{}.csv", outcome.stem), outcome.csv.clone()), (format!("{}.json", outcome.stem), outcome.json.clone())];
    if let Some(svg) = &outcome.svg {
        files.push((format!("{}.svg", outcome.stem), svg.clone()));
    }
    let written = output::write_atomic(out, &files)?;
    if let Command::Verify { suite } = command {
        let failed = outcome.failed();
        if failed > 0 {
            return Err(Failure::Verification { suite: suite.clone(), failed, total: outcome.records.len() }.into());
        }
    }
    Ok(written)
}

fn transform(cfg: &ExperimentConfig, seed: u64) -> Result<Labelled, Failure> {
    let space = cfg.space()?;
    let f = cfg.test_function()?;
    let sections = cfg.build_sections(seed)?;
    let label = space_label(&space);
    let mut rows = Vec::new();
    for (i, sec) in sections.iter().enumerate() {
        for r in cfg.refinement_ladder() {
            let (value, component) = if is_pseudo(&space) && sec.is_horosphere() {
                let cv = forward_transform(&f, sec, &cfg.pseudo_opts(&r)).map_err(numerical)?;
                (cv.value, format!("{:?}", cv.component).to_lowercase())
            } else {
                (radon_cauchy(&f, sec, &cfg.mode.mode(), &r.resolution()).map_err(numerical)?, "-".into())
            };
            let scale = value.value.norm();
            let rel = if scale > 0.0 { value.error_estimate / scale } else { value.error_estimate };
            let params =
                [("section", i.to_string()), ("p_re", num(sec.p().re)), ("p_im", num(sec.p().im)), ("refinement", r.label()), ("component", component)];
            let row = Row::new(&params, value.value, value.error_estimate)
                .verdict(rel, cfg.tolerance, rel <= cfg.tolerance)
                .with_detail(json!({ "regularization": format!("{:?}", value.regularization) }));
            rows.push((label.clone(), row));
        }
    }
    Ok(rows)
}

/// Largest `|f|` over the evaluation points and the atom centres.
fn reference_scale(f: &TestFunction, points: &[Vec<f64>]) -> f64 {
    let centres = f.terms().iter().filter_map(|(_, a)| match a {
        Atom::Bump(b) | Atom::Modulated { bump: b, .. } => Some(b.center.clone()),
        _ => None,
    });
    let m = points.iter().cloned().chain(centres).map(|x| f.eval(&x).abs()).fold(0.0, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn invert(cfg: &ExperimentConfig) -> Result<(Labelled, Option<String>), Failure> {
    let space = cfg.space()?;
    if is_pseudo(&space) {
        return Err(Failure::OutOfScope(format!(
            "inversion out of scope: no inversion formula is implemented on {}",
            space_label(&space)
        )));
    }
    let f = cfg.test_function()?;
    if cfg.points.is_empty() {
        return Err(Failure::Config("`invert` needs at least one entry in `points`".into()));
    }
    for (j, x) in cfg.points.iter().enumerate() {
        let ok = x.len() == space.n() && {
            let form = space.pair_rr(x, x);
            let size: f64 = x.iter().map(|v| v * v).sum();
            (form - 1.0).abs() <= 1e-9 * (1.0 + size) && (space.q() == 0 || x[0] > 0.0)
        };
        if !ok {
            return Err(Failure::Config(format!("points[{j}] does not lie on the quadric (upper sheet)")));
        }
    }
    let sheet = Sheet::of(&space).map_err(numerical)?;
    let scale = reference_scale(&f, &cfg.points);
    let label = space_label(&space);
    let ladder = cfg.refinement_ladder();
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (j, x) in cfg.points.iter().enumerate() {
        let truth = f.eval(x);
        let mut curve = Vec::new();
        for (k, r) in ladder.iter().enumerate() {
            let rec = match cfg.method {
                InversionMethod::Horospherical => {
                    let o = cfg.horo_opts(r);
                    match sheet {
                        Sheet::Hyperbolic => invert_hyperbolic(&f, x, &o),
                        Sheet::Sphere => invert_sphere(&f, x, &o),
                    }
                }
                InversionMethod::FundamentalForm => geodesic_cycle(space, x)
                    .and_then(|cyc| fundamental_form_integral(&f, &cyc, &cfg.form_opts(r)))
                    .map(|v| Reconstruction {
                        value: v.reconstruction,
                        error_estimate: v.total.error_estimate / reconstruction_constant(space.n()).norm(),
                    }),
            }
            .map_err(numerical)?;
            let params = [("point", j.to_string()), ("refinement", r.label())];
            let row = Row::new(&params, rec.value, rec.error_estimate)
                .against(truth, scale, cfg.tolerance)
                .with_detail(json!({ "x": x, "method": format!("{:?}", cfg.method) }));
            curve.push((k as f64, (rec.value - Complex64::new(truth, 0.0)).norm().max(1e-18).log10()));
            rows.push((label.clone(), row));
        }
        series.push((format!("point {j}"), curve));
    }
    let svg = output::svg_polylines(&format!("{}: reconstruction error", cfg.experiment_id), "refinement level", "log10 |error|", &series);
    Ok((rows, Some(svg)))
}

fn classify(cfg: &ExperimentConfig, seed: u64) -> Result<Labelled, Failure> {
    let space = cfg.space()?;
    let sphere = space.q() == 0 && space.n() == 3;
    if !is_pseudo(&space) && !sphere {
        return Err(Failure::OutOfScope(format!(
            "classification out of scope: horospheres are classified on S^2 and X_(2,n-2), not {}",
            space_label(&space)
        )));
    }
    let sections = cfg.build_sections(seed)?;
    let label = space_label(&space);
    let oracle = cfg.oracle_opts();
    let mut rows = Vec::new();
    for (k, sec) in sections.iter().enumerate() {
        if !sec.is_horosphere() {
            return Err(Failure::Config(format!("section {k} is not isotropic: box(zeta) = {}", sec.box_zeta())));
        }
        let base = [("section", k.to_string()), ("p_re", num(sec.p().re)), ("p_im", num(sec.p().im))];
        let row = if sphere {
            let class = classify_sphere_horosphere(sec).map_err(numerical)?;
            let name = match class {
                SphereHorosphereClass::Interior => "interior",
                SphereHorosphereClass::Boundary { .. } => "boundary",
                SphereHorosphereClass::Exterior => "exterior",
            };
            Row::new(&[&base[..], &[("class", name.into()), ("branch", "-".into()), ("oracle", "-".into())]].concat(), Complex64::new(0.0, 0.0), 0.0)
                .with_detail(json!({ "class": format!("{class:?}") }))
        } else {
            let class = classify_pseudo_horosphere(sec).map_err(numerical)?;
            let margin = class_margin(sec).map_err(numerical)?;
            let report = brute_force_real_points(sec, &oracle).map_err(numerical)?;
            let agree = oracle_agrees(&class, &report);
            let branch = match &class {
                PseudoHorosphereClass::Interior { branch: Some(b) }
                | PseudoHorosphereClass::Tangent { branch: b, .. }
                | PseudoHorosphereClass::Secant { branch: b } => format!("{b:?}").to_lowercase(),
                _ => "-".into(),
            };
            let verdict = format!("{:?}", report.verdict);
            let oracle_name = verdict.split([' ', '{']).next().unwrap_or_default().to_lowercase();
            Row::new(
                &[&base[..], &[("class", class.name().into()), ("branch", branch), ("oracle", oracle_name)]].concat(),
                Complex64::new(report.min_residual, 0.0),
                0.0,
            )
            .verdict(margin, 0.0, agree)
            .with_detail(json!({ "class": format!("{class:?}"), "oracle": verdict, "hits": report.hits }))
        };
        rows.push((label.clone(), row));
    }
    Ok(rows)
}
