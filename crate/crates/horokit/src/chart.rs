//! Coordinate charts on `X_{p,q} = {□ = 1}` and the invariant measure.
//!
//! The measure is `ω = [x, dx^{n-1}] = (n-1)! ι_x dV` restricted to the quadric.
//! In chart coordinates its density is `(n-1)! |det(x, ∂_1 x, …, ∂_{n-1} x)|`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadratic::{det, factorial, QuadraticSpace};

/// Width of the excluded collar around the poles of the angular chart.
pub const POLE_COLLAR: f64 = 1e-8;
/// Default half-width of the graph and product chart boxes.
pub const DEFAULT_BOX: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartKind {
    /// Hyperspherical angles `(θ_1, …, θ_{n-2}, φ)` on `S^{n-1}`.
    Angular,
    /// `x = (√(1+|y|²), y)` on the upper sheet of `X_{1,n-1}`.
    Graph,
    /// `x = (R cos φ, R sin φ, y)`, `R = √(1+|y|²)`, on `X_{2,n-2}`.
    Product,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    space: QuadraticSpace,
    kind: ChartKind,
    bounds: Vec<(f64, f64)>,
}

impl Chart {
    /// The natural chart for the given space with its default box.
    pub fn standard(space: QuadraticSpace) -> Result<Self> {
        let n = space.n();
        let (kind, bounds) = match (space.p(), space.q()) {
            (p, 0) if p >= 2 => {
                let mut b = vec![(0.0, PI); n - 2];
                b.push((f64::NEG_INFINITY, f64::INFINITY));
                (ChartKind::Angular, b)
            }
            (1, q) if q >= 1 => (ChartKind::Graph, vec![(-DEFAULT_BOX, DEFAULT_BOX); n - 1]),
            (2, q) if q >= 1 => {
                let mut b = vec![(f64::NEG_INFINITY, f64::INFINITY)];
                b.extend(std::iter::repeat_n((-DEFAULT_BOX, DEFAULT_BOX), n - 2));
                (ChartKind::Product, b)
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "no chart for signature ({}, {})",
                    space.p(),
                    space.q()
                )))
            }
        };
        Ok(Self { space, kind, bounds })
    }

    /// Same chart with the non-periodic coordinates limited to `±half_width`.
    pub fn with_box(mut self, half_width: f64) -> Self {
        if self.kind != ChartKind::Angular {
            let kind = self.kind;
            for (k, b) in self.bounds.iter_mut().enumerate() {
                if !(kind == ChartKind::Product && k == 0) {
                    *b = (-half_width, half_width);
                }
            }
        }
        self
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.space.n() - 1
    }

    /// Parameter box; periodic coordinates are unbounded.
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn is_periodic(&self, k: usize) -> bool {
        match self.kind {
            ChartKind::Angular => k == self.dim() - 1,
            ChartKind::Graph => false,
            ChartKind::Product => k == 0,
        }
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        crate::error::check_dim(self.dim(), u.len())?;
        for (x, (lo, hi)) in u.iter().zip(&self.bounds) {
            if !(x.is_finite() && *x >= *lo - 1e-12 && *x <= *hi + 1e-12) {
                return Err(Error::Domain(u.to_vec()));
            }
        }
        Ok(())
    }

    pub fn embed(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(self.embed_unchecked(u))
    }

    pub fn embed_unchecked(&self, u: &[f64]) -> Vec<f64> {
        let n = self.space.n();
        match self.kind {
            ChartKind::Angular => {
                let mut x = vec![0.0; n];
                let mut prod = 1.0;
                // x_n = cos θ_1, x_{n-1} = sin θ_1 cos θ_2, …
                for (k, th) in u[..n - 2].iter().enumerate() {
                    x[n - 1 - k] = prod * th.cos();
                    prod *= th.sin();
                }
                let phi = u[n - 2];
                x[0] = prod * phi.cos();
                x[1] = prod * phi.sin();
                x
            }
            ChartKind::Graph => {
                let r2: f64 = u.iter().map(|y| y * y).sum();
                let mut x = Vec::with_capacity(n);
                x.push((1.0 + r2).sqrt());
                x.extend_from_slice(u);
                x
            }
            ChartKind::Product => {
                let y = &u[1..];
                let r = (1.0 + y.iter().map(|v| v * v).sum::<f64>()).sqrt();
                let mut x = Vec::with_capacity(n);
                x.push(r * u[0].cos());
                x.push(r * u[0].sin());
                x.extend_from_slice(y);
                x
            }
        }
    }

    /// Columns `∂x/∂u_k`.
    pub fn jacobian(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let n = self.space.n();
        let d = self.dim();
        match self.kind {
            ChartKind::Angular => {
                let m = n - 2;
                let (s, c): (Vec<f64>, Vec<f64>) = u[..m].iter().map(|t| (t.sin(), t.cos())).unzip();
                let phi = u[m];
                let mut cols = vec![vec![0.0; n]; d];
                // x_{n-1-k} = (Π_{i<k} s_i) c_k  for k < m; x_0, x_1 = (Π s_i)(cos φ, sin φ)
                for (j, col) in cols.iter_mut().enumerate().take(m) {
                    for k in j..m {
                        let mut v = 1.0;
                        for (i, si) in s.iter().enumerate().take(k) {
                            v *= if i == j { c[i] } else { *si };
                        }
                        v *= if k == j { -s[k] } else { c[k] };
                        col[n - 1 - k] = v;
                    }
                    let mut v = 1.0;
                    for (i, si) in s.iter().enumerate() {
                        v *= if i == j { c[i] } else { *si };
                    }
                    col[0] = v * phi.cos();
                    col[1] = v * phi.sin();
                }
                let prod: f64 = s.iter().product();
                cols[m][0] = -prod * phi.sin();
                cols[m][1] = prod * phi.cos();
                cols
            }
            ChartKind::Graph => {
                let x0 = (1.0 + u.iter().map(|y| y * y).sum::<f64>()).sqrt();
                (0..d)
                    .map(|k| {
                        let mut col = vec![0.0; n];
                        col[0] = u[k] / x0;
                        col[k + 1] = 1.0;
                        col
                    })
                    .collect()
            }
            ChartKind::Product => {
                let phi = u[0];
                let y = &u[1..];
                let r = (1.0 + y.iter().map(|v| v * v).sum::<f64>()).sqrt();
                let mut cols = Vec::with_capacity(d);
                let mut c0 = vec![0.0; n];
                c0[0] = -r * phi.sin();
                c0[1] = r * phi.cos();
                cols.push(c0);
                for (k, yk) in y.iter().enumerate() {
                    let mut col = vec![0.0; n];
                    col[0] = yk / r * phi.cos();
                    col[1] = yk / r * phi.sin();
                    col[k + 2] = 1.0;
                    cols.push(col);
                }
                cols
            }
        }
    }

    fn near_pole(&self, u: &[f64]) -> bool {
        self.kind == ChartKind::Angular
            && u[..self.dim() - 1]
                .iter()
                .any(|t| *t < POLE_COLLAR || *t > PI - POLE_COLLAR)
    }

    /// Density of `ω` in chart coordinates.
    pub fn measure_density(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        if self.near_pole(u) {
            return Err(Error::SingularChart(u.to_vec()));
        }
        let x = self.embed_unchecked(u);
        let jac = self.jacobian(u);
        let mut cols: Vec<&[f64]> = vec![&x];
        cols.extend(jac.iter().map(|c| c.as_slice()));
        Ok(factorial(self.dim()) * det(&cols)?.abs())
    }

    /// Pull-back of `(n-1)! Σ_j (-1)^{j-1} δ_j x_j ∧_{i≠j} dx_i`.
    ///
    /// Kept as a cross-check: it coincides with the measure density when
    /// `q = 0` and is not invariant otherwise.
    pub fn displayed_sum_density(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let n = self.space.n();
        let x = self.embed_unchecked(u);
        let jac = self.jacobian(u);
        let mut total = 0.0;
        for j in 0..n {
            let minor: Vec<Vec<f64>> = jac
                .iter()
                .map(|c| c.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| *v).collect())
                .collect();
            let cols: Vec<&[f64]> = minor.iter().map(|c| c.as_slice()).collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * self.space.delta(j) * x[j] * det(&cols)?;
        }
        Ok(factorial(self.dim()) * total)
    }

    /// Chart coordinates of a point on the quadric (principal branch).
    pub fn inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.space.n();
        crate::error::check_dim(n, x.len())?;
        match self.kind {
            ChartKind::Angular => {
                let mut u = Vec::with_capacity(n - 1);
                let mut rest = 1.0f64;
                for k in 0..n - 2 {
                    let c = (x[n - 1 - k] / rest.max(1e-300)).clamp(-1.0, 1.0);
                    let th = c.acos();
                    u.push(th);
                    rest *= th.sin();
                }
                u.push(x[1].atan2(x[0]));
                Ok(u)
            }
            ChartKind::Graph => Ok(x[1..].to_vec()),
            ChartKind::Product => {
                let mut u = vec![x[1].atan2(x[0])];
                u.extend_from_slice(&x[2..]);
                Ok(u)
            }
        }
    }
}
