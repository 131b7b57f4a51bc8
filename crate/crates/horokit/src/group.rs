//! One-parameter subgroups of `SO(p,q)` and transport of the base point.

use crate::error::{Error, Result};
use crate::quadratic::QuadraticSpace;

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    a: Vec<f64>,
}

impl Mat {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Self { n, a }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("matrix rows must be square".into()));
        }
        Ok(Self {
            n,
            a: rows.iter().flatten().copied().collect(),
        })
    }

    /// Builds the matrix whose columns are `cols`.
    pub fn from_cols(cols: &[Vec<f64>]) -> Result<Self> {
        let n = cols.len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::Input("matrix columns must be square".into()));
        }
        let mut a = vec![0.0; n * n];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                a[i * n + j] = c[i];
            }
        }
        Ok(Self { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn apply_c(&self, v: &[crate::C64]) -> Vec<crate::C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| v[j] * self.get(i, j)).sum())
            .collect()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = self.get(i, k);
                if x == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[i * n + j] += x * other.get(k, j);
                }
            }
        }
        Mat { n, a }
    }

    /// Inverse of an element of `O(p,q)`: `J gᵀ J`.
    pub fn q_inverse(&self, q: &QuadraticSpace) -> Mat {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = q.delta(i) * self.get(j, i) * q.delta(j);
            }
        }
        Mat { n, a }
    }
}

/// Rotation (equal signs) or boost (opposite signs) in the `(i, j)` plane.
///
/// Indices are zero-based. For a rotation `e_i ↦ cos t e_i + sin t e_j`;
/// for a boost `e_i ↦ cosh t e_i + sinh t e_j`.
pub fn group_element(q: &QuadraticSpace, plane: (usize, usize), t: f64) -> Result<Mat> {
    let (i, j) = plane;
    let n = q.n();
    if i == j || i >= n || j >= n {
        return Err(Error::Input(format!("invalid plane ({i}, {j}) for n = {n}")));
    }
    let mut g = Mat::identity(n);
    let (c, s) = if q.delta(i) == q.delta(j) {
        (t.cos(), t.sin())
    } else {
        (t.cosh(), t.sinh())
    };
    let rot = q.delta(i) == q.delta(j);
    g.a[i * n + i] = c;
    g.a[j * n + j] = c;
    g.a[j * n + i] = s;
    g.a[i * n + j] = if rot { -s } else { s };
    Ok(g)
}

/// An element `g` of the identity component with `g e_1 = x`, for `□(x) = 1`.
///
/// Built as (rotations in the positive block)(rotations in the negative
/// block)(boost in the `(1, p+1)` plane).
pub fn transport(q: &QuadraticSpace, x: &[f64]) -> Result<Mat> {
    let n = q.n();
    crate::error::check_dim(n, x.len())?;
    let form = q.pair_rr(x, x);
    if (form - 1.0).abs() > 1e-9 * (1.0 + x.iter().map(|v| v * v).sum::<f64>()) {
        return Err(Error::Precondition(format!("point is off the quadric: □(x) = {form}")));
    }
    let p = q.p();
    let pos: Vec<f64> = x[..p].to_vec();
    let neg: Vec<f64> = x[p..].to_vec();
    let b = neg.iter().map(|v| v * v).sum::<f64>().sqrt();
    if p == 1 && x[0] < 0.0 {
        return Err(Error::Precondition("point lies on the lower sheet".into()));
    }
    let mut g = Mat::identity(n);
    if q.q() > 0 && b > 0.0 {
        // a one-dimensional negative block cannot rotate, so the boost carries the sign
        let t = if q.q() == 1 { neg[0].asinh() } else { b.asinh() };
        g = group_element(q, (0, p), t)?;
    }
    let r_neg = block_rotation(q, p, n, &neg)?;
    let r_pos = block_rotation(q, 0, p, &pos)?;
    Ok(r_pos.mul(&r_neg).mul(&g))
}

/// Rotation of the block `lo..hi` (det +1) sending `e_lo` to `v/|v|`.
fn block_rotation(q: &QuadraticSpace, lo: usize, hi: usize, v: &[f64]) -> Result<Mat> {
    let n = q.n();
    if hi - lo <= 1 || v.iter().all(|x| *x == 0.0) {
        return Ok(Mat::identity(n));
    }
    Ok(orthonormal_block(n, lo, hi, v))
}

/// Orthogonal block (det +1) mapping `e_lo` to `v/|v|` within `lo..hi`.
fn orthonormal_block(n: usize, lo: usize, hi: usize, v: &[f64]) -> Mat {
    let m = hi - lo;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: Vec<f64> = v.iter().map(|x| x / norm).collect();
    // complete u to an orthonormal basis by Gram–Schmidt on the standard basis
    let mut basis: Vec<Vec<f64>> = vec![u];
    for k in 0..m {
        if basis.len() == m {
            break;
        }
        let mut w = vec![0.0; m];
        w[k] = 1.0;
        for b in &basis {
            let d: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= d * bi;
            }
        }
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn > 1e-8 {
            basis.push(w.iter().map(|x| x / wn).collect());
        }
    }
    // fix orientation
    let cols: Vec<&[f64]> = basis.iter().map(|b| b.as_slice()).collect();
    let d = crate::quadratic::det(&cols).unwrap_or(1.0);
    if d < 0.0 {
        for x in basis[m - 1].iter_mut() {
            *x = -*x;
        }
    }
    let mut g = Mat::identity(n);
    for (j, b) in basis.iter().enumerate() {
        for i in 0..m {
            g.a[(lo + i) * n + lo + j] = b[i];
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_quarter_turn_permutes() {
        let q = QuadraticSpace::sphere(3).unwrap();
        let g = group_element(&q, (0, 1), std::f64::consts::FRAC_PI_2).unwrap();
        let v = g.apply(&[1.0, 0.0, 0.0]);
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boost_at_zero_is_identity() {
        let q = QuadraticSpace::hyperbolic(3).unwrap();
        assert_eq!(group_element(&q, (0, 1), 0.0).unwrap(), Mat::identity(3));
    }

    #[test]
    fn transport_hits_target() {
        for (q, x) in [
            (QuadraticSpace::sphere(3).unwrap(), vec![0.6, 0.0, 0.8]),
            (QuadraticSpace::sphere(4).unwrap(), vec![0.1, -0.5, 0.7, 0.5]),
            (
                QuadraticSpace::hyperbolic(3).unwrap(),
                vec![(1.0f64 + 0.25 + 0.09).sqrt(), 0.5, -0.3],
            ),
            (QuadraticSpace::pseudo(3).unwrap(), vec![0.6, (1.0f64 + 0.49 - 0.36).sqrt(), -0.7]),
            (
                QuadraticSpace::pseudo(4).unwrap(),
                vec![0.3, (1.0f64 + 0.04 + 0.25 - 0.09).sqrt(), 0.2, -0.5],
            ),
        ] {
            let g = transport(&q, &x).unwrap();
            let y = g.apply(&{
                let mut e = vec![0.0; q.n()];
                e[0] = 1.0;
                e
            });
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-13, "{x:?} vs {y:?}");
            }
            let gi = g.q_inverse(&q);
            let id = gi.mul(&g);
            for i in 0..q.n() {
                for j in 0..q.n() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((id.get(i, j) - e).abs() < 1e-12);
                }
            }
        }
    }
}
