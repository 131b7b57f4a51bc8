//! The quadratic form `□_{p,q}`, its pairing, and bracket determinants.
//!
//! A bracket `[a_1, …, a_m, dξ^{k}]` is the determinant whose last `k` columns
//! are the same differential. Evaluated on tangent vectors `v_1..v_k` it equals
//! `k! · det(a_1, …, a_m, v_1, …, v_k)`.

use num_complex::{Complex64, ComplexFloat};

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;

/// Signature data for `□_{p,q}(x) = x_1² + … + x_p² − x_{p+1}² − … − x_n²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSpace {
    p: usize,
    q: usize,
}

impl QuadraticSpace {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::Input("signature needs p >= 1".into()));
        }
        if p + q < 2 {
            return Err(Error::Input("dimension n = p + q must be at least 2".into()));
        }
        Ok(Self { p, q })
    }

    /// `X_{n,0} = S^{n-1}`.
    pub fn sphere(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// `X_{1,n-1}`; its upper sheet is hyperbolic space.
    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::new(1, n.saturating_sub(1))
    }

    /// `X_{2,n-2}`.
    pub fn pseudo(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Input("X_{2,n-2} needs n >= 3".into()));
        }
        Self::new(2, n - 2)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// Sign `δ_j` for a zero-based index `j`.
    #[inline]
    pub fn delta(&self, j: usize) -> f64 {
        if j < self.p {
            1.0
        } else {
            -1.0
        }
    }

    pub fn signs(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.delta(j)).collect()
    }

    pub fn quad_form<T: ComplexFloat>(&self, v: &[T]) -> Result<T> {
        check_dim(self.n(), v.len())?;
        Ok(self.pair_unchecked(v, v))
    }

    pub fn pairing<T: ComplexFloat>(&self, u: &[T], v: &[T]) -> Result<T> {
        check_dim(self.n(), u.len())?;
        check_dim(self.n(), v.len())?;
        Ok(self.pair_unchecked(u, v))
    }

    /// `Σ δ_j u_j v_j` without dimension checks (bilinear, no conjugation).
    #[inline]
    pub fn pair_unchecked<T: ComplexFloat>(&self, u: &[T], v: &[T]) -> T {
        let mut pos = T::zero();
        let mut neg = T::zero();
        for j in 0..self.p {
            pos = pos + u[j] * v[j];
        }
        for j in self.p..u.len() {
            neg = neg + u[j] * v[j];
        }
        pos - neg
    }

    /// Pairing of a complex vector with a real one.
    #[inline]
    pub fn pair_cr(&self, z: &[C64], x: &[f64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..z.len() {
            acc += z[j] * (self.delta(j) * x[j]);
        }
        acc
    }

    /// Pairing of two real vectors.
    #[inline]
    pub fn pair_rr(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for j in 0..u.len() {
            acc += self.delta(j) * u[j] * v[j];
        }
        acc
    }
}

/// Determinant of the square matrix given by its columns (LU, partial pivoting).
pub fn det<T: ComplexFloat>(cols: &[&[T]]) -> Result<T> {
    let n = cols.len();
    if n == 0 {
        return Ok(T::one());
    }
    if n > 16 {
        return Err(Error::Unsupported(format!("determinant of size {n} > 16")));
    }
    for c in cols {
        check_dim(n, c.len())?;
    }
    // a[r][c] row-major copy
    let mut a: Vec<Vec<T>> = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
    let mut d = T::one();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k][k].abs();
        for (r, row) in a.iter().enumerate().skip(k + 1) {
            let m = row[k].abs();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best == num_traits_zero::<T>() {
            return Ok(T::zero());
        }
        if piv != k {
            a.swap(piv, k);
            d = -d;
        }
        let pivot = a[k][k];
        d = d * pivot;
        for r in (k + 1)..n {
            let factor = a[r][k] / pivot;
            if factor == T::zero() {
                continue;
            }
            for c in (k + 1)..n {
                let v = a[k][c];
                a[r][c] = a[r][c] - factor * v;
            }
        }
    }
    Ok(d)
}

fn num_traits_zero<T: ComplexFloat>() -> T::Real {
    T::zero().abs()
}

/// `det(a, b, c)` for three 3-vectors, written out.
#[inline]
pub fn det3<T: ComplexFloat>(a: &[T; 3], b: &[T; 3], c: &[T; 3]) -> T {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Euclidean cross product, so that `det3(v, a, b) = v · cross(a, b)`.
#[inline]
pub fn cross<T: ComplexFloat>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Fixed columns plus a count of repeated differential slots.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketSpec<T> {
    fixed: Vec<Vec<T>>,
    k: usize,
}

impl<T: ComplexFloat> BracketSpec<T> {
    pub fn new(n: usize, fixed: Vec<Vec<T>>, k: usize) -> Result<Self> {
        if fixed.len() + k != n {
            return Err(Error::Input(format!(
                "bracket needs {n} columns, got {} fixed + {k} slots",
                fixed.len()
            )));
        }
        for c in &fixed {
            check_dim(n, c.len())?;
        }
        Ok(Self { fixed, k })
    }

    pub fn slots(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.fixed.len() + self.k
    }
}

/// Evaluates the bracket on `k` tangent vectors: `k! · det(fixed…, tangents…)`.
pub fn bracket_eval<T: ComplexFloat>(spec: &BracketSpec<T>, tangents: &[Vec<T>]) -> Result<T> {
    if tangents.len() != spec.k {
        return Err(Error::Input(format!(
            "bracket has {} slots, got {} tangents",
            spec.k,
            tangents.len()
        )));
    }
    let n = spec.n();
    let cols: Vec<&[T]> = spec
        .fixed
        .iter()
        .chain(tangents.iter())
        .map(|c| c.as_slice())
        .collect();
    for c in &cols {
        check_dim(n, c.len())?;
    }
    let d = det(&cols)?;
    Ok(d * T::from(factorial(spec.k)).unwrap())
}

/// The three pieces of the exterior-derivative identity for `[a(ξ), ξ, dξ^{n-2}]`.
///
/// For any smooth field `a` on `R^n`,
/// `d[a, ξ, dξ^{n-2}] = (1/(n-1)) ([(ξ·∇)a + (n-1)a, dξ^{n-1}] − (div a)[ξ, dξ^{n-1}])`.
/// The first bracket (the Euler term) vanishes for fields homogeneous of degree
/// `1-n`, which is the case arising from the fundamental form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma1Terms {
    /// Finite-difference Stokes value of `d[a, ξ, dξ^{n-2}]` on the cell.
    pub exterior: f64,
    /// `−(1/(n-1)) (div a) [ξ, dξ^{n-1}]` on the cell.
    pub divergence: f64,
    /// `(1/(n-1)) [(ξ·∇)a + (n-1)a, dξ^{n-1}]` on the cell.
    pub euler: f64,
}

impl Lemma1Terms {
    pub fn residual(&self) -> f64 {
        self.exterior - self.divergence - self.euler
    }
}

/// Central-difference evaluation of the identity terms at `xi0` on the
/// `(n-1)`-cell spanned by `frame`.
pub fn lemma1_terms(
    field: &dyn Fn(&[f64]) -> Vec<f64>,
    xi0: &[f64],
    frame: &[Vec<f64>],
    h: f64,
) -> Result<Lemma1Terms> {
    let n = xi0.len();
    if n < 3 {
        return Err(Error::Unsupported("the identity needs n >= 3".into()));
    }
    if frame.len() != n - 1 {
        return Err(Error::Input(format!("frame needs {} vectors", n - 1)));
    }
    for v in frame {
        check_dim(n, v.len())?;
    }
    if !(h > 0.0) {
        return Err(Error::Input("step h must be positive".into()));
    }
    let shifted = |base: &[f64], v: &[f64], s: f64| -> Vec<f64> {
        base.iter().zip(v).map(|(b, d)| b + s * d).collect()
    };
    // the (n-2)-form α_ξ(w…) = (n-2)! det(a(ξ), ξ, w…)
    let alpha = |xi: &[f64], ws: &[&Vec<f64>]| -> Result<f64> {
        let a = field(xi);
        check_dim(n, a.len())?;
        let mut cols: Vec<&[f64]> = vec![&a, xi];
        cols.extend(ws.iter().map(|w| w.as_slice()));
        Ok(det(&cols)? * factorial(n - 2))
    };
    let mut exterior = 0.0;
    for i in 0..frame.len() {
        let rest: Vec<&Vec<f64>> = frame
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v)
            .collect();
        let plus = alpha(&shifted(xi0, &frame[i], h), &rest)?;
        let minus = alpha(&shifted(xi0, &frame[i], -h), &rest)?;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        exterior += sign * (plus - minus) / (2.0 * h);
    }
    let mut div = 0.0;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let ap = field(&shifted(xi0, &e, h));
        let am = field(&shifted(xi0, &e, -h));
        div += (ap[j] - am[j]) / (2.0 * h);
    }
    let ap = field(&shifted(xi0, xi0, h));
    let am = field(&shifted(xi0, xi0, -h));
    let a0 = field(xi0);
    let euler_vec: Vec<f64> = (0..n)
        .map(|j| (ap[j] - am[j]) / (2.0 * h) + (n as f64 - 1.0) * a0[j])
        .collect();
    let frame_cols: Vec<&[f64]> = frame.iter().map(|v| v.as_slice()).collect();
    let top = |first: &[f64]| -> Result<f64> {
        let mut cols = vec![first];
        cols.extend(frame_cols.iter().copied());
        Ok(det(&cols)? * factorial(n - 1))
    };
    let inv = 1.0 / (n as f64 - 1.0);
    Ok(Lemma1Terms {
        exterior,
        divergence: -inv * div * top(xi0)?,
        euler: inv * top(&euler_vec)?,
    })
}

/// Residual of the exterior-derivative identity; `O(h²)` for smooth fields.
pub fn lemma1_residual(
    field: &dyn Fn(&[f64]) -> Vec<f64>,
    xi0: &[f64],
    frame: &[Vec<f64>],
    h: f64,
) -> Result<f64> {
    Ok(lemma1_terms(field, xi0, frame, h)?.residual())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_form_examples() {
        let q12 = QuadraticSpace::new(1, 2).unwrap();
        assert_eq!(q12.quad_form(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        let q22 = QuadraticSpace::new(2, 2).unwrap();
        assert_eq!(q22.quad_form(&[1.0, 0.0, 1.0, 0.0]).unwrap(), 0.0);
        let q30 = QuadraticSpace::new(3, 0).unwrap();
        assert!((q30.quad_form(&[0.6, 0.8, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            q30.quad_form(&[1.0, 0.0]),
            Err(Error::Dimension { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn bracket_examples() {
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        let s = BracketSpec::new(3, vec![e(0), e(1)], 1).unwrap();
        assert_eq!(bracket_eval(&s, &[e(2)]).unwrap(), 1.0);
        let s = BracketSpec::new(3, vec![e(0), e(0)], 1).unwrap();
        assert_eq!(bracket_eval(&s, &[vec![0.3, -1.0, 2.0]]).unwrap(), 0.0);
        let s = BracketSpec::new(3, vec![], 3).unwrap();
        assert_eq!(bracket_eval(&s, &[e(0), e(1), e(2)]).unwrap(), 6.0);
        assert!(BracketSpec::new(3, vec![e(0)], 1).is_err());
    }

    #[test]
    fn det_handles_pivoting_and_complex() {
        let a = [0.0, 1.0, 0.0];
        let b = [1.0, 0.0, 0.0];
        let c = [0.0, 0.0, 2.0];
        assert_eq!(det(&[&a[..], &b[..], &c[..]]).unwrap(), -2.0);
        assert_eq!(det3(&a, &b, &c), -2.0);
        let i = C64::new(0.0, 1.0);
        let z = [[i, C64::new(1.0, 0.0)], [C64::new(2.0, 0.0), i]];
        let d = det(&[&z[0][..], &z[1][..]]).unwrap();
        assert!((d - C64::new(-3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lemma_needs_three_dimensions() {
        let f = |x: &[f64]| x.to_vec();
        let r = lemma1_residual(&f, &[1.0, 0.0], &[vec![0.0, 1.0]], 1e-3);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn constant_field_identity() {
        // d[a, ξ, dξ] = 2 [a, dξ²]/2 for constant a: only the Euler term survives
        let f = |_: &[f64]| vec![0.3, -0.2, 0.5];
        let frame = vec![vec![1.0, 0.2, 0.0], vec![0.0, 1.0, 0.4]];
        let t = lemma1_terms(&f, &[0.4, 1.1, -0.7], &frame, 1e-3).unwrap();
        assert!(t.residual().abs() < 1e-12);
        assert!(t.exterior.abs() > 0.1);
        assert!(t.divergence.abs() < 1e-12);
    }
}
