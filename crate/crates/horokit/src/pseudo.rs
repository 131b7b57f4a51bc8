//! Horospheres on `X_{2,n−2}`: classification, a brute-force real-point
//! oracle, the three-component horospherical cycle, and forward transforms.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::chart::Chart;
use crate::cycles::{deformed_cycle, Cycle, Family};
use crate::error::{check_dim, Error, Result};
use crate::group::{group_element, Mat};
use crate::polar::Weight;
use crate::quadratic::QuadraticSpace;
use crate::richardson::{extrapolate, ladder};
use crate::section::{Regularization, Section, TransformValue};
use crate::testfn::TestFunction;
use crate::transform::{moments, Mode, Resolution};

/// Relative tolerance on the defining (in)equalities.
pub const CLASS_TOL: f64 = 1e-10;

/// Orientation of the positive 2-plane spanned by `ξ, η`, read on the
/// `(x₁, x₂)` factor. Constant under `ζ ↦ cζ`, it separates `Θ^+` from `Θ^−`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PseudoHorosphereClass {
    /// No real points: `□ξ = □η > |p|²` (`branch` set), or a real horosphere
    /// with non-real `p` (`branch = None`).
    Interior { branch: Option<Branch> },
    /// `ζ` real up to a phase, `p` real up to the same phase.
    RealType,
    /// `□ξ = |p|² > 0`: the single real point `x = ξ/p`.
    Tangent { point: Vec<f64>, branch: Branch },
    /// `0 < □ξ < |p|²`: a compact family of real points.
    Secant { branch: Branch },
    /// `□ξ < 0`: real points for every `p`.
    Infinite,
    /// `□ξ = □η = 0` with `ζ` not proportional to a real vector.
    Degenerate,
}

impl PseudoHorosphereClass {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Interior { .. } => "interior",
            Self::RealType => "real",
            Self::Tangent { .. } => "tangent",
            Self::Secant { .. } => "secant",
            Self::Infinite => "infinite",
            Self::Degenerate => "degenerate",
        }
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `ζ/p` (or `ζ/|ζ|` when `p = 0`) with the target value of the pairing.
fn normalize(s: &Section) -> (Vec<Complex64>, Complex64) {
    let p = s.p();
    let zn = s.zeta().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if p.norm() <= CLASS_TOL * zn {
        (s.zeta().iter().map(|z| z / zn).collect(), Complex64::new(0.0, 0.0))
    } else {
        (s.zeta().iter().map(|z| z / p).collect(), Complex64::new(1.0, 0.0))
    }
}

fn branch_of(xi: &[f64], eta: &[f64]) -> Branch {
    if xi[0] * eta[1] - xi[1] * eta[0] >= 0.0 {
        Branch::Plus
    } else {
        Branch::Minus
    }
}

struct Invariants {
    /// `□ξ/|p|²` after normalization (or `□ξ/|ζ|²` when `p = 0`).
    b: f64,
    /// `|ζ|²` in the same normalization.
    scale: f64,
    /// Normalized `ζ` is a complex multiple of a real vector.
    real_line: bool,
    target: Complex64,
    z: Vec<Complex64>,
}

fn invariants(s: &Section) -> Result<Invariants> {
    let space = *s.space();
    if space.p() != 2 || space.q() == 0 {
        return Err(Error::Unsupported("pseudo-hyperbolic classification needs signature (2, n−2)".into()));
    }
    let zn2: f64 = s.zeta().iter().map(|z| z.norm_sqr()).sum();
    if zn2 == 0.0 {
        return Err(Error::Input("ζ = 0 defines no horosphere".into()));
    }
    if s.box_zeta().norm() > 1e-10 * zn2 {
        return Err(Error::Precondition(format!("section is not a horosphere: □ζ = {}", s.box_zeta())));
    }
    let (z, target) = normalize(s);
    let xi: Vec<f64> = z.iter().map(|v| v.re).collect();
    let eta: Vec<f64> = z.iter().map(|v| v.im).collect();
    let (a, c) = (euclid(&xi), euclid(&eta));
    // |ξ ∧ η| from the bivector components; the Gram form loses half the digits
    let mut wedge = 0.0;
    for i in 0..xi.len() {
        for j in i + 1..xi.len() {
            wedge += (xi[i] * eta[j] - xi[j] * eta[i]).powi(2);
        }
    }
    let area = wedge.sqrt();
    let scale = a * a + c * c;
    Ok(Invariants { b: space.pair_rr(&xi, &xi), scale, real_line: area <= CLASS_TOL * scale, target, z })
}

/// Classifies an isotropic section of `X_{2,n−2}`.
pub fn classify_pseudo_horosphere(s: &Section) -> Result<PseudoHorosphereClass> {
    let inv = invariants(s)?;
    if inv.real_line {
        // ζ = c v with v real and null: real points need p/c real
        let k = inv.z.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).copied().unwrap_or_default();
        let phase = k / k.norm();
        let t = inv.target / phase;
        return Ok(if t.im.abs() <= CLASS_TOL * t.norm().max(1.0) {
            PseudoHorosphereClass::RealType
        } else {
            PseudoHorosphereClass::Interior { branch: None }
        });
    }
    let xi: Vec<f64> = inv.z.iter().map(|v| v.re).collect();
    let eta: Vec<f64> = inv.z.iter().map(|v| v.im).collect();
    let branch = branch_of(&xi, &eta);
    let b = inv.b;
    if b.abs() <= CLASS_TOL * inv.scale {
        return Ok(PseudoHorosphereClass::Degenerate);
    }
    if b < 0.0 {
        return Ok(PseudoHorosphereClass::Infinite);
    }
    if inv.target == Complex64::new(0.0, 0.0) {
        // p = 0 and □ξ > 0: x₁ = x₂ = 0 would be forced
        return Ok(PseudoHorosphereClass::Interior { branch: Some(branch) });
    }
    if (b - 1.0).abs() <= CLASS_TOL * b.max(1.0) {
        let r = b.sqrt();
        return Ok(PseudoHorosphereClass::Tangent { point: xi.iter().map(|v| v / r).collect(), branch });
    }
    Ok(if b > 1.0 {
        PseudoHorosphereClass::Interior { branch: Some(branch) }
    } else {
        PseudoHorosphereClass::Secant { branch }
    })
}

/// Distance of the defining quantities from the nearest class boundary,
/// relative; zero for sections lying on one (tangent, degenerate).
pub fn class_margin(s: &Section) -> Result<f64> {
    let inv = invariants(s)?;
    if inv.real_line {
        return Ok(f64::INFINITY);
    }
    let zero = inv.b.abs() / inv.scale;
    if inv.target == Complex64::new(0.0, 0.0) {
        return Ok(zero);
    }
    Ok(zero.min((inv.b - 1.0).abs() / inv.b.max(1.0)))
}

/// Grid and polishing settings for [`brute_force_real_points`].
#[derive(Clone, Debug, PartialEq)]
pub struct OracleOpts {
    pub angle_nodes: usize,
    pub box_nodes: usize,
    /// Half width of the box on the negative-signature block.
    pub half_width: f64,
    /// Number of separated grid minima to polish.
    pub seeds: usize,
    /// A polished point counts as a hit below this residual.
    pub residual_tol: f64,
    /// Displacement for the local-dimension probe.
    pub probe: f64,
}

impl Default for OracleOpts {
    fn default() -> Self {
        Self { angle_nodes: 48, box_nodes: 24, half_width: 6.0, seeds: 24, residual_tol: 1e-10, probe: 1e-2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleVerdict {
    NoRealPoints,
    /// Every hit and every displaced restart returns to one point.
    Localized { point: Vec<f64> },
    /// Restarts move along a positive-dimensional real set.
    Extended,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub min_residual: f64,
    pub hits: usize,
    pub points: Vec<Vec<f64>>,
    pub verdict: OracleVerdict,
}

struct Residual<'a> {
    chart: &'a Chart,
    z: Vec<Complex64>,
    target: Complex64,
}

impl Residual<'_> {
    fn value(&self, u: &[f64]) -> Complex64 {
        let x = self.chart.embed_unchecked(u);
        self.chart.space().pair_cr(&self.z, &x) - self.target
    }

    fn gradient(&self, u: &[f64]) -> Vec<Complex64> {
        self.chart.jacobian(u).iter().map(|col| self.chart.space().pair_cr(&self.z, col)).collect()
    }

    /// Damped minimal-norm Gauss–Newton on the two real equations.
    fn polish(&self, start: &[f64], tol: f64) -> (Vec<f64>, f64) {
        let mut u = start.to_vec();
        let mut r = self.value(&u);
        let mut mu = 1e-6;
        for _ in 0..400 {
            if r.norm() <= tol * 1e-3 {
                break;
            }
            let g = self.gradient(&u);
            // J J^T for rows (Re g, Im g)
            let a11: f64 = g.iter().map(|v| v.re * v.re).sum();
            let a22: f64 = g.iter().map(|v| v.im * v.im).sum();
            let a12: f64 = g.iter().map(|v| v.re * v.im).sum();
            let mut improved = false;
            while mu < 1e8 {
                let (m11, m22) = (a11 + mu, a22 + mu);
                let det = m11 * m22 - a12 * a12;
                let y1 = (m22 * r.re - a12 * r.im) / det;
                let y2 = (m11 * r.im - a12 * r.re) / det;
                let trial: Vec<f64> = u.iter().zip(&g).map(|(x, v)| x - (v.re * y1 + v.im * y2)).collect();
                let rt = self.value(&trial);
                if rt.norm() < r.norm() {
                    u = trial;
                    r = rt;
                    mu = (mu * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
                mu *= 10.0;
            }
            if !improved {
                break;
            }
        }
        u[0] = u[0].rem_euclid(TAU);
        (u, r.norm())
    }
}

/// Searches the product chart of `X_{2,n−2}` for real points of `E(ζ, p)`.
pub fn brute_force_real_points(s: &Section, opts: &OracleOpts) -> Result<OracleReport> {
    let space = *s.space();
    if space.p() != 2 || space.q() == 0 {
        return Err(Error::Unsupported("the oracle searches X_(2, n−2)".into()));
    }
    if opts.angle_nodes == 0 || opts.box_nodes == 0 || opts.seeds == 0 || !(opts.half_width > 0.0) {
        return Err(Error::Input("empty oracle grid".into()));
    }
    let chart = Chart::standard(space)?.with_box(opts.half_width);
    let (z, target) = normalize(s);
    let res = Residual { chart: &chart, z, target };
    let m = space.n() - 2;
    let nb = opts.box_nodes;
    let ycoord = |i: usize| -opts.half_width + (i as f64 + 0.5) * 2.0 * opts.half_width / nb as f64;
    let cells = nb.pow(m as u32);
    // grid scan parallel over angle tiles
    let tiles = crate::par::map_indexed(opts.angle_nodes, |ia| {
        let th = TAU * (ia as f64 + 0.5) / opts.angle_nodes as f64;
        let mut u = vec![th; m + 1];
        (0..cells)
            .map(|c| {
                let mut rest = c;
                for k in 0..m {
                    u[k + 1] = ycoord(rest % nb);
                    rest /= nb;
                }
                (res.value(&u).norm(), u.clone())
            })
            .collect::<Vec<_>>()
    });
    let mut all: Vec<(f64, Vec<f64>)> = tiles.into_iter().flatten().collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sep = 1.5 * (2.0 * opts.half_width / nb as f64).max(TAU / opts.angle_nodes as f64);
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for (_, u) in &all {
        if seeds.len() >= opts.seeds {
            break;
        }
        if seeds.iter().all(|v| chart_distance(v, u) > sep) {
            seeds.push(u.clone());
        }
    }
    let polished: Vec<(Vec<f64>, f64)> = crate::par::map_indexed(seeds.len(), |k| res.polish(&seeds[k], opts.residual_tol));
    let min_residual = polished.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hits: Vec<&Vec<f64>> = polished.iter().filter(|p| p.1 <= opts.residual_tol).map(|p| &p.0).collect();
    let points: Vec<Vec<f64>> = hits.iter().map(|u| chart.embed_unchecked(u)).collect();
    let verdict = if hits.is_empty() {
        OracleVerdict::NoRealPoints
    } else {
        let anchor = hits[0].clone();
        let ax = &points[0];
        let same = |x: &[f64]| ambient_distance(x, ax) <= 10.0 * opts.probe * opts.probe;
        let mut localized = points.iter().all(|p| same(p));
        if localized {
            'probe: for k in 0..=m {
                for sign in [-1.0, 1.0] {
                    let mut start = anchor.clone();
                    start[k] += sign * opts.probe;
                    let (u, r) = res.polish(&start, opts.residual_tol);
                    if r <= opts.residual_tol && !same(&chart.embed_unchecked(&u)) {
                        localized = false;
                        break 'probe;
                    }
                }
            }
        }
        if localized {
            OracleVerdict::Localized { point: ax.clone() }
        } else {
            OracleVerdict::Extended
        }
    };
    Ok(OracleReport { min_residual, hits: hits.len(), points, verdict })
}

fn chart_distance(a: &[f64], b: &[f64]) -> f64 {
    let d0 = (a[0] - b[0]).rem_euclid(TAU);
    let d0 = d0.min(TAU - d0);
    (d0 * d0 + a[1..].iter().zip(&b[1..]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).sqrt()
}

fn ambient_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Expected oracle outcome for a class.
pub fn oracle_agrees(class: &PseudoHorosphereClass, report: &OracleReport) -> bool {
    match (class, &report.verdict) {
        (PseudoHorosphereClass::Interior { .. }, OracleVerdict::NoRealPoints) => true,
        (PseudoHorosphereClass::Tangent { point, .. }, OracleVerdict::Localized { point: q }) => {
            ambient_distance(point, q) <= 1e-3 * (1.0 + euclid(point))
        }
        (
            PseudoHorosphereClass::RealType
            | PseudoHorosphereClass::Secant { .. }
            | PseudoHorosphereClass::Infinite
            | PseudoHorosphereClass::Degenerate,
            OracleVerdict::Extended,
        ) => true,
        _ => false,
    }
}

/// The cycle `γ_δ(x)`: `ζ^δ = (iδ√□λ, λ)`, `p^δ = iδ√□λ` transported to `x`.
pub fn pseudo_cycles(space: QuadraticSpace, x: &[f64], delta: f64) -> Result<Cycle> {
    if space.p() != 2 || space.q() == 0 {
        return Err(Error::Unsupported("pseudo cycles live on X_(2, n−2)".into()));
    }
    deformed_cycle(space, x, Family::Pseudo { delta })
}

/// Which part of `γ₁(x)` a section belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycleComponent {
    Real,
    Plus,
    Minus,
    /// Anything else, including the degenerate joint boundary.
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleSample {
    pub lambda: Vec<f64>,
    pub section: Section,
    pub class: PseudoHorosphereClass,
    pub component: CycleComponent,
}

/// `γ₁(x)` sampled on `S^{n−2}` with its empirical partition.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeComponentCycle {
    pub base: Vec<f64>,
    pub samples: Vec<CycleSample>,
    /// Connected components found by flood fill within each label.
    pub components: usize,
    pub real_count: usize,
    pub plus_count: usize,
    pub minus_count: usize,
    pub max_defect: f64,
}

/// Offset hyperspherical grid on `S^{m}` with `nodes` steps per `π`.
fn sphere_grid(m: usize, nodes: usize) -> Vec<Vec<f64>> {
    let h = PI / nodes as f64;
    let mut out = Vec::new();
    let polar = m - 1;
    let total = nodes.pow(polar as u32) * 2 * nodes;
    for idx in 0..total {
        let mut rest = idx;
        let mut angles = Vec::with_capacity(m);
        for _ in 0..polar {
            angles.push((rest % nodes) as f64 * h + 0.5 * h);
            rest /= nodes;
        }
        angles.push((rest as f64 + 0.5) * h);
        // λ_1 = cos θ_1, λ_2 = sin θ_1 cos θ_2, …, last pair from φ
        let mut v = vec![0.0; m + 1];
        let mut prod = 1.0;
        for (k, th) in angles[..polar].iter().enumerate() {
            v[k] = prod * th.cos();
            prod *= th.sin();
        }
        let phi = angles[polar];
        v[m - 1] = prod * phi.cos();
        v[m] = prod * phi.sin();
        out.push(v);
    }
    out
}

/// Samples `γ₁(x)` and counts its connected components.
pub fn three_component_cycle(space: QuadraticSpace, x: &[f64], nodes: usize) -> Result<ThreeComponentCycle> {
    check_dim(space.n(), x.len())?;
    if nodes < 4 {
        return Err(Error::Input("need at least 4 nodes per π".into()));
    }
    let cyc = pseudo_cycles(space, x, 1.0)?;
    let grid = sphere_grid(space.n() - 2, nodes);
    let samples: Vec<CycleSample> = grid
        .into_iter()
        .map(|lambda| {
            let section = cyc.section(&lambda)?;
            let class = classify_pseudo_horosphere(&section)?;
            let component = match &class {
                PseudoHorosphereClass::RealType => CycleComponent::Real,
                PseudoHorosphereClass::Tangent { branch: Branch::Plus, .. } => CycleComponent::Plus,
                PseudoHorosphereClass::Tangent { branch: Branch::Minus, .. } => CycleComponent::Minus,
                _ => CycleComponent::Other,
            };
            Ok(CycleSample { lambda, section, class, component })
        })
        .collect::<Result<_>>()?;
    let max_defect = samples.iter().map(|s| s.section.defect(x).norm()).fold(0.0, f64::max);
    let reach = 1.5 * PI / nodes as f64;
    let mut label = vec![usize::MAX; samples.len()];
    let mut components = 0;
    for start in 0..samples.len() {
        if label[start] != usize::MAX || samples[start].component == CycleComponent::Other {
            continue;
        }
        let mut stack = vec![start];
        label[start] = components;
        while let Some(i) = stack.pop() {
            for j in 0..samples.len() {
                if label[j] == usize::MAX
                    && samples[j].component == samples[i].component
                    && ambient_distance(&samples[i].lambda, &samples[j].lambda) <= reach
                {
                    label[j] = components;
                    stack.push(j);
                }
            }
        }
        components += 1;
    }
    let count = |c: CycleComponent| samples.iter().filter(|s| s.component == c).count();
    Ok(ThreeComponentCycle {
        base: x.to_vec(),
        real_count: count(CycleComponent::Real),
        plus_count: count(CycleComponent::Plus),
        minus_count: count(CycleComponent::Minus),
        samples,
        components,
        max_defect,
    })
}

/// Settings for [`forward_transform`].
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoOpts {
    pub res: Resolution,
    /// Boundary value on real horospheres. `Auto` slices at `n = 4` and uses
    /// the `p → p + iε` ladder above.
    pub real_mode: Mode,
    /// Ladder `p(1 − ε'_k)` moving tangent horospheres into `Θ^±`.
    pub shift0: f64,
    pub shift_levels: usize,
}

impl Default for PseudoOpts {
    fn default() -> Self {
        Self { res: Resolution::default(), real_mode: Mode::Auto, shift0: 0.01, shift_levels: 8 }
    }
}

/// Which of `H_R`, `H_I^±` a value belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformComponent {
    Real,
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentValue {
    pub component: TransformComponent,
    pub class: PseudoHorosphereClass,
    pub value: TransformValue,
}

fn tag(branch: Branch) -> TransformComponent {
    match branch {
        Branch::Plus => TransformComponent::Plus,
        Branch::Minus => TransformComponent::Minus,
    }
}

/// `Hf(ζ, p)` on `Θ` and its boundary, tagged by component.
pub fn forward_transform(f: &TestFunction, s: &Section, opts: &PseudoOpts) -> Result<ComponentValue> {
    if f.space() != s.space() {
        return Err(Error::Input("section and test function live on different spaces".into()));
    }
    let class = classify_pseudo_horosphere(s)?;
    let one = [Weight::one(s.space().n())];
    let single = std::slice::from_ref(s);
    let (component, values, error, reg) = match &class {
        PseudoHorosphereClass::Interior { branch } => {
            let m = moments(f, single, 1, &one, &Mode::Direct, &opts.res, None)?;
            (branch.map_or(TransformComponent::Real, tag), m.values, m.error, m.regularization)
        }
        PseudoHorosphereClass::RealType => {
            let m = moments(f, single, 1, &one, &opts.real_mode, &opts.res, None)?;
            (TransformComponent::Real, m.values, m.error, m.regularization)
        }
        PseudoHorosphereClass::Tangent { branch, .. } => {
            if opts.shift_levels < 2 || !(opts.shift0 > 0.0 && opts.shift0 < 1.0) {
                return Err(Error::Input("shift ladder needs 0 < shift0 < 1 and two levels".into()));
            }
            let lad = ladder(opts.shift0, opts.shift_levels);
            let mut levels = Vec::with_capacity(lad.len());
            let mut quad: f64 = 0.0;
            for &e in &lad {
                let m = moments(f, &[s.with_p(s.p() * (1.0 - e))], 1, &one, &Mode::Direct, &opts.res, None)?;
                quad = quad.max(m.error);
                levels.push(m.values);
            }
            let ex = extrapolate(&levels, 2.0);
            (tag(*branch), ex.value, ex.error + quad, Regularization::EpsExtrapolation { ladder: lad })
        }
        PseudoHorosphereClass::Secant { .. } | PseudoHorosphereClass::Infinite => {
            return Err(Error::Unsupported(format!("the transform is not defined on {} horospheres", class.name())));
        }
        PseudoHorosphereClass::Degenerate => {
            return Err(Error::Unsupported("degenerate horospheres are excluded".into()));
        }
    };
    Ok(ComponentValue { component, class, value: TransformValue::new(values[0], error, reg)? })
}

/// A random element of the identity component of `SO(2, n−2)` with boosts of
/// rapidity at most `max_boost`, driven by uniform samples in `[0, 1)`.
pub fn random_group_element(space: &QuadraticSpace, max_boost: f64, uniform: &mut impl FnMut() -> f64) -> Result<Mat> {
    let n = space.n();
    let mut g = group_element(space, (0, 1), TAU * uniform())?;
    for j in 2..n {
        for i in 0..2 {
            g = g.mul(&group_element(space, (i, j), max_boost * (2.0 * uniform() - 1.0))?);
        }
        if j + 1 < n {
            g = g.mul(&group_element(space, (j, j + 1), TAU * uniform())?);
        }
    }
    g = g.mul(&group_element(space, (0, 1), TAU * uniform())?);
    Ok(g)
}

/// Random isotropic section drawn from the canonical forms (interior,
/// secant, tangent, infinite, real), moved by a random group element and
/// rescaled by a random complex factor.
pub fn random_isotropic_section(space: QuadraticSpace, uniform: &mut impl FnMut() -> f64) -> Result<Section> {
    let n = space.n();
    if space.p() != 2 || n < 4 {
        return Err(Error::Unsupported("random sections are drawn on X_(2, n−2), n ≥ 4".into()));
    }
    let c = |v: f64| Complex64::new(v, 0.0);
    let mut z = vec![c(0.0); n];
    let sign = if uniform() < 0.5 { -1.0 } else { 1.0 };
    let p = match (uniform() * 5.0) as usize {
        0 | 1 => {
            let lam = 0.4 + 2.1 * uniform();
            z[0] = c(lam);
            z[1] = Complex64::new(0.0, sign * lam);
            c(1.0)
        }
        2 => {
            z[0] = c(1.0);
            z[1] = Complex64::new(0.0, sign);
            c(1.0)
        }
        3 => {
            let lam = 0.5 + 1.5 * uniform();
            z[2] = c(lam);
            z[3] = Complex64::new(0.0, sign * lam);
            Complex64::from_polar(uniform(), TAU * uniform())
        }
        _ => {
            let a = TAU * uniform();
            z[0] = c(a.cos());
            z[1] = c(a.sin());
            z[2] = c(sign);
            let im = if uniform() < 0.5 { 0.0 } else { 0.5 * uniform() };
            Complex64::new(2.0 * uniform() - 1.0, im)
        }
    };
    let g = random_group_element(&space, 0.5, uniform)?;
    let scale = Complex64::from_polar(0.5 + 1.5 * uniform(), TAU * uniform());
    Section::new(space, g.apply_c(&z).into_iter().map(|v| v * scale).collect(), p * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical(space: QuadraticSpace, lam: f64) -> Section {
        let mut xi = vec![0.0; space.n()];
        let mut eta = vec![0.0; space.n()];
        xi[0] = lam;
        eta[1] = lam;
        Section::complex(space, &xi, &eta, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn stated_canonical_cases() {
        let s = QuadraticSpace::pseudo(4).unwrap();
        assert_eq!(
            classify_pseudo_horosphere(&canonical(s, 1.5)).unwrap(),
            PseudoHorosphereClass::Interior { branch: Some(Branch::Plus) }
        );
        assert_eq!(
            classify_pseudo_horosphere(&canonical(s, 1.0)).unwrap(),
            PseudoHorosphereClass::Tangent { point: vec![1.0, 0.0, 0.0, 0.0], branch: Branch::Plus }
        );
        let inf = Section::complex(s, &[0.0, 0.0, 0.7, 0.0], &[0.0, 0.0, 0.0, 0.7], Complex64::new(0.3, -0.2)).unwrap();
        assert_eq!(classify_pseudo_horosphere(&inf).unwrap(), PseudoHorosphereClass::Infinite);
    }

    #[test]
    fn zero_zeta_is_rejected() {
        let s = QuadraticSpace::pseudo(4).unwrap();
        assert!(matches!(Section::real(s, &[0.0; 4], 1.0), Err(Error::Input(_))));
    }

    #[test]
    fn degenerate_and_real_forms() {
        let s = QuadraticSpace::pseudo(4).unwrap();
        let deg = Section::complex(s, &[1.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 1.0], Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(classify_pseudo_horosphere(&deg).unwrap(), PseudoHorosphereClass::Degenerate);
        let real = Section::real(s, &[0.6, 0.8, 1.0, 0.0], 0.4).unwrap();
        assert_eq!(classify_pseudo_horosphere(&real).unwrap(), PseudoHorosphereClass::RealType);
        // the same horosphere written with a complex phase
        let w = Complex64::from_polar(1.3, 0.7);
        let rot = Section::new(s, real.zeta().iter().map(|v| v * w).collect(), real.p() * w).unwrap();
        assert_eq!(classify_pseudo_horosphere(&rot).unwrap(), PseudoHorosphereClass::RealType);
        let shifted = real.with_p(Complex64::new(0.4, 0.1));
        assert_eq!(classify_pseudo_horosphere(&shifted).unwrap(), PseudoHorosphereClass::Interior { branch: None });
    }

    #[test]
    fn oracle_on_stated_cases() {
        let s = QuadraticSpace::pseudo(4).unwrap();
        let o = OracleOpts::default();
        let inside = brute_force_real_points(&canonical(s, 1.5), &o).unwrap();
        assert_eq!(inside.verdict, OracleVerdict::NoRealPoints);
        assert!(inside.min_residual > 0.1);
        let tangent = brute_force_real_points(&canonical(s, 1.0), &o).unwrap();
        match tangent.verdict {
            OracleVerdict::Localized { point } => assert!(ambient_distance(&point, &[1.0, 0.0, 0.0, 0.0]) < 1e-4),
            v => panic!("{v:?}"),
        }
        let real = Section::real(s, &[1.0, 0.0, 1.0, 0.0], 1.0).unwrap();
        assert_eq!(brute_force_real_points(&real, &o).unwrap().verdict, OracleVerdict::Extended);
        let secant = brute_force_real_points(&canonical(s, 0.7), &o).unwrap();
        assert_eq!(secant.verdict, OracleVerdict::Extended);
    }

    #[test]
    fn empty_oracle_grid_is_rejected() {
        let s = QuadraticSpace::pseudo(4).unwrap();
        let o = OracleOpts { box_nodes: 0, ..OracleOpts::default() };
        assert!(matches!(brute_force_real_points(&canonical(s, 1.5), &o), Err(Error::Input(_))));
    }

    #[test]
    fn cycle_has_three_components_in_four_dimensions() {
        let s = QuadraticSpace::pseudo(4).unwrap();
        let c = three_component_cycle(s, &[1.0, 0.0, 0.0, 0.0], 16).unwrap();
        assert_eq!(c.components, 3);
        assert!(c.max_defect < 1e-12);
        assert!(c.real_count > 0 && c.plus_count > 0 && c.minus_count > 0);
        assert_eq!(c.real_count + c.plus_count + c.minus_count, c.samples.len());
    }

    #[test]
    fn geodesic_end_of_the_family() {
        let s = QuadraticSpace::pseudo(4).unwrap();
        let cyc = pseudo_cycles(s, &[1.0, 0.0, 0.0, 0.0], 0.0).unwrap();
        let sec = cyc.section(&[0.0, 0.6, 0.8]).unwrap();
        assert_eq!(sec.zeta()[0], Complex64::new(0.0, 0.0));
        assert_eq!(sec.p(), Complex64::new(0.0, 0.0));
    }
}
