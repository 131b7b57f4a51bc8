//! Experiment configuration: the JSON schema, its validation, and the
//! translation into library objects.

use std::path::{Path, PathBuf};

use horokit::cycles::FormOpts;
use horokit::horo::HoroOpts;
use horokit::pseudo::{random_isotropic_section, OracleOpts, PseudoOpts};
use horokit::richardson::Expansion;
use horokit::section::Section;
use horokit::testfn::{Atom, Bump, Profile, TestFunction};
use horokit::transform::{Mode, Resolution};
use horokit::QuadraticSpace;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::{self, Failure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub space: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<SectionSpec>,
    /// Evaluation points for `invert`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub method: InversionMethod,
    /// One run per entry; an empty list means library defaults.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refinements: Vec<Refinement>,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftSpec>,
    /// Pass threshold on the row's error metric.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_tolerance() -> f64 {
    1e-3
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    /// `[p, q]` of the form `□_{p,q}`.
    pub signature: [usize; 2],
    /// Half width of the search box on the negative block (`classify`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_box: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Bump {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    /// `bump(u) (d · u)`.
    Modulated {
        center: Vec<f64>,
        radius: f64,
        direction: Vec<f64>,
        #[serde(default = "one")]
        weight: f64,
    },
    Harmonic {
        degree: usize,
        order: i64,
        #[serde(default = "one")]
        weight: f64,
    },
    Constant {
        #[serde(default = "one")]
        weight: f64,
    },
    Sum {
        terms: Vec<FunctionSpec>,
    },
}

/// `p` as a real number or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Real(f64),
    Complex([f64; 2]),
}

impl PValue {
    pub fn value(self) -> Complex64 {
        match self {
            PValue::Real(r) => Complex64::new(r, 0.0),
            PValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionEntry {
    pub xi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    pub p: PValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SectionSpec {
    List(Vec<SectionEntry>),
    /// Fixed `ζ`, real part of `p` swept over a range.
    Sweep {
        xi: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<Vec<f64>>,
        p_re: Range,
        #[serde(default)]
        p_im: f64,
    },
    /// Seeded draws: real sections on Riemannian sheets, isotropic ones on `X_{2,n−2}`.
    Random {
        count: usize,
        #[serde(default = "default_p_range")]
        p_range: [f64; 2],
    },
}

fn default_p_range() -> [f64; 2] {
    [-0.5, 0.5]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    #[default]
    Horospherical,
    /// The fundamental form on the geodesic cycle, divided by the constant.
    FundamentalForm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Refinement {
    /// Relative tolerance of the adaptive engines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Gauss–Legendre nodes per chart axis on the fallback grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_nodes: Option<usize>,
    /// Fixed node count on the cycle (`invert`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_nodes: Option<usize>,
}

impl Refinement {
    pub fn resolution(&self) -> Resolution {
        let mut r = Resolution::default();
        if let Some(t) = self.rel_tol {
            r.polar.rel_tol = t;
            r.polar.inner_rel_tol = t * 0.1;
            r.coarea.rel_tol = t;
            r.coarea.slice_rel_tol = t * 0.01;
            r.null_slice.rel_tol = t;
            r.null_slice.slice_rel_tol = t * 0.1;
        }
        if let Some(g) = self.grid_nodes {
            r.grid_nodes = g;
        }
        r
    }

    /// A short label for CSV parameter columns.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(t) = self.rel_tol {
            parts.push(format!("tol={t:e}"));
        }
        if let Some(g) = self.grid_nodes {
            parts.push(format!("grid={g}"));
        }
        if let Some(c) = self.cycle_nodes {
            parts.push(format!("cycle={c}"));
        }
        if parts.is_empty() {
            "default".into()
        } else {
            parts.join(";")
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    #[default]
    Auto,
    Direct,
    PvDelta,
    EpsLadder {
        eps0: f64,
        levels: usize,
        #[serde(default)]
        half_integer: bool,
    },
    FixedEps(f64),
}

impl ModeSpec {
    pub fn mode(&self) -> Mode {
        match *self {
            ModeSpec::Auto => Mode::Auto,
            ModeSpec::Direct => Mode::Direct,
            ModeSpec::PvDelta => Mode::PvDelta,
            ModeSpec::EpsLadder { eps0, levels, half_integer } => Mode::EpsExtrapolation {
                eps0,
                levels,
                expansion: if half_integer { Expansion::HalfInteger } else { Expansion::Integer },
            },
            ModeSpec::FixedEps(e) => Mode::FixedEps(e),
        }
    }
}

/// Ladder of real shifts on tangent horospheres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    pub shift0: f64,
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// File stem; defaults to the experiment id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
    #[serde(default = "yes")]
    pub svg: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, stem: None, svg: true }
    }
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be a positive finite number, got {v}")))
    }
}

fn finite(name: &str, vs: &[f64]) -> Result<(), Failure> {
    match vs.iter().find(|v| !v.is_finite()) {
        None => Ok(()),
        Some(v) => Err(bad(format!("{name} contains the non-finite value {v}"))),
    }
}

impl FunctionSpec {
    fn validate(&self, path: &str) -> Result<(), Failure> {
        match self {
            FunctionSpec::Bump { center, radius, weight } => {
                finite(&format!("{path}.center"), center)?;
                positive(&format!("{path}.radius"), *radius)?;
                finite(&format!("{path}.weight"), &[*weight])
            }
            FunctionSpec::Modulated { center, radius, direction, weight } => {
                finite(&format!("{path}.center"), center)?;
                finite(&format!("{path}.direction"), direction)?;
                positive(&format!("{path}.radius"), *radius)?;
                finite(&format!("{path}.weight"), &[*weight])
            }
            FunctionSpec::Harmonic { degree, order, weight } => {
                if order.unsigned_abs() as usize > *degree {
                    return Err(bad(format!("{path}: |order| {order} exceeds degree {degree}")));
                }
                finite(&format!("{path}.weight"), &[*weight])
            }
            FunctionSpec::Constant { weight } => finite(&format!("{path}.weight"), &[*weight]),
            FunctionSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(bad(format!("{path}.terms is empty")));
                }
                terms.iter().enumerate().try_for_each(|(i, t)| t.validate(&format!("{path}.terms[{i}]")))
            }
        }
    }

    fn atoms(&self, space: &QuadraticSpace, out: &mut Vec<(f64, Atom)>) {
        let profile = if space.p() >= 2 && space.q() >= 1 { Profile::Euclidean } else { Profile::Invariant };
        match self {
            FunctionSpec::Bump { center, radius, weight } => {
                out.push((*weight, Atom::Bump(Bump { center: center.clone(), radius: *radius, profile })))
            }
            FunctionSpec::Modulated { center, radius, direction, weight } => out.push((
                *weight,
                Atom::Modulated { bump: Bump { center: center.clone(), radius: *radius, profile }, direction: direction.clone() },
            )),
            FunctionSpec::Harmonic { degree, order, weight } => {
                out.push((*weight, Atom::Harmonic { degree: *degree, order: *order }))
            }
            FunctionSpec::Constant { weight } => out.push((*weight, Atom::Constant)),
            FunctionSpec::Sum { terms } => terms.iter().for_each(|t| t.atoms(space, out)),
        }
    }

    pub fn build(&self, space: QuadraticSpace) -> Result<TestFunction, Failure> {
        let mut terms = Vec::new();
        self.atoms(&space, &mut terms);
        TestFunction::new(space, terms).map_err(failure::config)
    }
}

impl SectionSpec {
    fn validate(&self) -> Result<(), Failure> {
        match self {
            SectionSpec::List(entries) => {
                if entries.is_empty() {
                    return Err(bad("sections.list is empty"));
                }
                for (i, e) in entries.iter().enumerate() {
                    finite(&format!("sections.list[{i}].xi"), &e.xi)?;
                    finite(&format!("sections.list[{i}].eta"), e.eta.as_deref().unwrap_or(&[]))?;
                    let p = e.p.value();
                    finite(&format!("sections.list[{i}].p"), &[p.re, p.im])?;
                }
                Ok(())
            }
            SectionSpec::Sweep { xi, eta, p_re, p_im } => {
                finite("sections.sweep.xi", xi)?;
                finite("sections.sweep.eta", eta.as_deref().unwrap_or(&[]))?;
                finite("sections.sweep.p", &[p_re.from, p_re.to, *p_im])?;
                if p_re.steps == 0 {
                    return Err(bad("sections.sweep.p_re.steps must be positive"));
                }
                Ok(())
            }
            SectionSpec::Random { count, p_range } => {
                if *count == 0 {
                    return Err(bad("sections.random.count must be positive"));
                }
                finite("sections.random.p_range", p_range)?;
                if p_range[0] > p_range[1] {
                    return Err(bad("sections.random.p_range is reversed"));
                }
                Ok(())
            }
        }
    }

    fn entry(space: QuadraticSpace, xi: &[f64], eta: Option<&[f64]>, p: Complex64) -> Result<Section, Failure> {
        match eta {
            Some(eta) => Section::complex(space, xi, eta, p),
            None if p.im == 0.0 => Section::real(space, xi, p.re),
            None => Section::new(space, xi.iter().map(|&v| Complex64::new(v, 0.0)).collect(), p),
        }
        .map_err(failure::config)
    }

    pub fn build(&self, space: QuadraticSpace, seed: u64) -> Result<Vec<Section>, Failure> {
        match self {
            SectionSpec::List(entries) => {
                entries.iter().map(|e| Self::entry(space, &e.xi, e.eta.as_deref(), e.p.value())).collect()
            }
            SectionSpec::Sweep { xi, eta, p_re, p_im } => (0..p_re.steps)
                .map(|k| {
                    let t = if p_re.steps == 1 { 0.0 } else { k as f64 / (p_re.steps - 1) as f64 };
                    let p = Complex64::new(p_re.from + t * (p_re.to - p_re.from), *p_im);
                    Self::entry(space, xi, eta.as_deref(), p)
                })
                .collect(),
            SectionSpec::Random { count, p_range } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..*count)
                    .map(|_| {
                        if space.p() >= 2 && space.q() >= 1 {
                            let mut uniform = || rng.gen::<f64>();
                            return random_isotropic_section(space, &mut uniform).map_err(failure::config);
                        }
                        let xi = loop {
                            let v: Vec<f64> = (0..space.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                            if v.iter().map(|a| a * a).sum::<f64>() > 0.04 {
                                break v;
                            }
                        };
                        let p = rng.gen_range(p_range[0]..=p_range[1]);
                        Self::entry(space, &xi, None, Complex64::new(p, 0.0))
                    })
                    .collect()
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// A config for commands that need nothing beyond an id (`verify`).
    pub fn named(experiment_id: &str) -> Self {
        Self {
            experiment_id: experiment_id.into(),
            space: SpaceSpec { signature: [1, 2], chart_box: None },
            function: None,
            sections: None,
            points: Vec::new(),
            method: InversionMethod::default(),
            refinements: Vec::new(),
            mode: ModeSpec::default(),
            shift: None,
            tolerance: default_tolerance(),
            output: OutputSpec::default(),
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let id = &self.experiment_id;
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(bad(format!("experiment_id {id:?} must be nonempty and use [A-Za-z0-9_-]")));
        }
        self.space()?;
        if let Some(b) = self.space.chart_box {
            positive("space.chart_box", b)?;
        }
        if let Some(f) = &self.function {
            f.validate("function")?;
        }
        if let Some(s) = &self.sections {
            s.validate()?;
        }
        for (i, x) in self.points.iter().enumerate() {
            finite(&format!("points[{i}]"), x)?;
        }
        for (i, r) in self.refinements.iter().enumerate() {
            if let Some(t) = r.rel_tol {
                positive(&format!("refinements[{i}].rel_tol"), t)?;
            }
            if matches!(r.grid_nodes, Some(g) if g < 2) {
                return Err(bad(format!("refinements[{i}].grid_nodes must be at least 2")));
            }
            if matches!(r.cycle_nodes, Some(c) if c < 4 || c % 2 != 0) {
                return Err(bad(format!("refinements[{i}].cycle_nodes must be even and at least 4")));
            }
        }
        match self.mode {
            ModeSpec::EpsLadder { eps0, levels, .. } => {
                positive("mode.eps_ladder.eps0", eps0)?;
                if levels == 0 {
                    return Err(bad("mode.eps_ladder.levels must be positive"));
                }
            }
            ModeSpec::FixedEps(e) => finite("mode.fixed_eps", &[e])?,
            _ => {}
        }
        if let Some(s) = self.shift {
            positive("shift.shift0", s.shift0)?;
            if s.shift0 >= 1.0 || s.levels < 2 {
                return Err(bad("shift needs shift0 < 1 and at least two levels"));
            }
        }
        positive("tolerance", self.tolerance)?;
        if let Some(stem) = &self.output.stem {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return Err(bad("output.stem must be a plain file name"));
            }
        }
        Ok(())
    }

    pub fn space(&self) -> Result<QuadraticSpace, Failure> {
        let [p, q] = self.space.signature;
        QuadraticSpace::new(p, q).map_err(failure::config)
    }

    pub fn test_function(&self) -> Result<TestFunction, Failure> {
        let spec = self.function.as_ref().ok_or_else(|| bad("this command needs a `function`"))?;
        spec.build(self.space()?)
    }

    pub fn build_sections(&self, seed: u64) -> Result<Vec<Section>, Failure> {
        let spec = self.sections.as_ref().ok_or_else(|| bad("this command needs `sections`"))?;
        spec.build(self.space()?, seed)
    }

    pub fn refinement_ladder(&self) -> Vec<Refinement> {
        if self.refinements.is_empty() {
            vec![Refinement::default()]
        } else {
            self.refinements.clone()
        }
    }

    pub fn horo_opts(&self, r: &Refinement) -> HoroOpts {
        let mut o = HoroOpts { mode: self.mode.mode(), res: r.resolution(), ..HoroOpts::default() };
        if let Some(s) = self.shift {
            o.shift0 = s.shift0;
            o.shift_levels = s.levels;
        }
        if let Some(c) = r.cycle_nodes {
            o.nodes = c;
            o.max_nodes = c;
        }
        o
    }

    pub fn pseudo_opts(&self, r: &Refinement) -> PseudoOpts {
        let mut o = PseudoOpts { res: r.resolution(), real_mode: self.mode.mode(), ..PseudoOpts::default() };
        if let Some(s) = self.shift {
            o.shift0 = s.shift0;
            o.shift_levels = s.levels;
        }
        o
    }

    pub fn form_opts(&self, r: &Refinement) -> FormOpts {
        let mut o = FormOpts { mode: self.mode.mode(), res: r.resolution(), ..FormOpts::default() };
        if let Some(c) = r.cycle_nodes {
            o.nodes = c;
        }
        o
    }

    pub fn oracle_opts(&self) -> OracleOpts {
        let mut o = OracleOpts::default();
        if let Some(b) = self.space.chart_box {
            o.half_width = b;
        }
        o
    }

    /// SHA-256 of the canonical serialization together with the effective seed.
    pub fn hash(&self, seed: u64) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        h.update(seed.to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = r#"{
        "experiment_id": "s2",
        "space": {"signature": [3, 0]},
        "function": {"kind": "bump", "center": [0, 0, 1], "radius": 0.9},
        "sections": {"list": [{"xi": [0, 0, 1], "p": 0.5}]}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_json(SPHERE).unwrap();
        assert_eq!(cfg.tolerance, 1e-3);
        assert!(cfg.output.svg);
        let again = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(cfg.hash(1), again.hash(1));
        assert_ne!(cfg.hash(1), cfg.hash(2));
        assert_eq!(cfg.build_sections(0).unwrap().len(), 1);
    }

    #[test]
    fn schema_violations_are_config_errors() {
        let cases = [
            SPHERE.replace("0.9", "-0.9"),
            SPHERE.replace("\"s2\"", "\"a b\""),
            SPHERE.replace("\"p\"", "\"q\""),
            SPHERE.replace("[3, 0]", "[1, 0]"),
            SPHERE.replace("}\n    }", "}, \"extra\": 1\n    }"),
            "{".to_string(),
        ];
        for text in cases {
            assert!(matches!(ExperimentConfig::from_json(&text), Err(Failure::Config(_))), "{text}");
        }
    }

    #[test]
    fn modes_and_refinements_translate() {
        let m = ModeSpec::EpsLadder { eps0: 0.1, levels: 4, half_integer: true }.mode();
        assert_eq!(m, Mode::EpsExtrapolation { eps0: 0.1, levels: 4, expansion: Expansion::HalfInteger });
        let r = Refinement { rel_tol: Some(1e-6), grid_nodes: Some(16), cycle_nodes: None };
        let res = r.resolution();
        assert_eq!((res.polar.rel_tol, res.grid_nodes), (1e-6, 16));
        assert_eq!(r.label(), "tol=1e-6;grid=16");
    }

    #[test]
    fn random_sections_follow_the_seed() {
        let mut cfg = ExperimentConfig::from_json(SPHERE).unwrap();
        cfg.sections = Some(SectionSpec::Random { count: 3, p_range: [-0.2, 0.2] });
        assert_eq!(cfg.build_sections(5).unwrap(), cfg.build_sections(5).unwrap());
        assert_ne!(cfg.build_sections(5).unwrap(), cfg.build_sections(6).unwrap());
        cfg.space.signature = [2, 2];
        assert!(cfg.build_sections(5).unwrap().iter().all(|s| s.is_horosphere()));
    }
}
