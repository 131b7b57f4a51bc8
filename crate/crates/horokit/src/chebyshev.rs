//! Chebyshev interpolation on `[-1, 1]` and boundary values of its Cauchy
//! transform `Φ(y) = ∫ g(s)/(s − y − i0) ds`.
//!
//! With `L(y) = ∫ ds/(s − y − i0) = log((1 − y)/(1 + y)) + iπ` and
//! `R_j(y) = ∫ (T_j(s) − T_j(y))/(s − y) ds`, one has
//! `∫ T_j(s)/(s − y − i0) ds = T_j(y) L(y) + R_j(y)`, where `R_0 = 0`,
//! `R_1 = 2`, and `R_{j+1} = 2 m_j + 2y R_j − R_{j−1}` with `m_j = ∫ T_j`.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Chebyshev–Lobatto points `cos(πk/(N−1))`, `k = 0..N`.
pub fn lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|k| (PI * k as f64 / (n - 1) as f64).cos()).collect()
}

/// Chebyshev series `Σ c_j T_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cheb {
    pub coeffs: Vec<Complex64>,
}

impl Cheb {
    /// Interpolant through values at [`lobatto`] points.
    pub fn from_lobatto(values: &[Complex64]) -> Self {
        let n = values.len();
        assert!(n >= 2);
        let m = (n - 1) as f64;
        let period = 2 * (n - 1);
        let table: Vec<f64> = (0..period).map(|i| (PI * i as f64 / m).cos()).collect();
        let coeffs = (0..n)
            .map(|j| {
                let mut s = Complex64::new(0.0, 0.0);
                for (k, v) in values.iter().enumerate() {
                    let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                    s += v * (w * table[(j * k) % period]);
                }
                let cj = if j == 0 || j == n - 1 { 1.0 / m } else { 2.0 / m };
                s * cj
            })
            .collect();
        Self { coeffs }
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        // Clenshaw
        let (mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * y) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * y - b2
    }

    /// Magnitude of the trailing coefficients, a proxy for truncation error.
    pub fn tail(&self) -> f64 {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(4)..].iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `∫_{-1}^{1} g(s)/(s − y − i0)^{k+1} ds` for `k = 0..=kmax`, `-1 < y < 1`.
    pub fn cauchy_inside(&self, y: f64, kmax: usize) -> Vec<Complex64> {
        let nd = kmax + 1;
        let n = self.coeffs.len();
        // T_j^{(i)}(y) and R_j^{(i)}(y) by the differentiated recurrences.
        let mut t_prev = vec![0.0; nd];
        let mut t_cur = vec![0.0; nd];
        t_prev[0] = 1.0; // T_0
        t_cur[0] = y; // T_1
        if nd > 1 {
            t_cur[1] = 1.0;
        }
        let mut r_prev = vec![0.0; nd]; // R_0 = 0
        let mut r_cur = vec![0.0; nd]; // R_1 = 2
        r_cur[0] = 2.0;
        let mut gsum = vec![Complex64::new(0.0, 0.0); nd];
        let mut rsum = vec![Complex64::new(0.0, 0.0); nd];
        for i in 0..nd {
            gsum[i] += self.coeffs[0] * t_prev[i];
        }
        for j in 1..n {
            for i in 0..nd {
                gsum[i] += self.coeffs[j] * t_cur[i];
                rsum[i] += self.coeffs[j] * r_cur[i];
            }
            let mj = if j % 2 == 0 { 2.0 / (1.0 - (j * j) as f64) } else { 0.0 };
            let mut t_next = vec![0.0; nd];
            let mut r_next = vec![0.0; nd];
            for i in 0..nd {
                let lower_t = if i > 0 { 2.0 * i as f64 * t_cur[i - 1] } else { 0.0 };
                let lower_r = if i > 0 { 2.0 * i as f64 * r_cur[i - 1] } else { 2.0 * mj };
                t_next[i] = 2.0 * y * t_cur[i] + lower_t - t_prev[i];
                r_next[i] = 2.0 * y * r_cur[i] + lower_r - r_prev[i];
            }
            t_prev = std::mem::replace(&mut t_cur, t_next);
            r_prev = std::mem::replace(&mut r_cur, r_next);
        }
        // L^{(i)}(y+i0)
        let mut l = vec![Complex64::new(0.0, 0.0); nd];
        l[0] = Complex64::new(((1.0 - y) / (1.0 + y)).ln(), PI);
        let mut fact = 1.0;
        for (i, li) in l.iter_mut().enumerate().skip(1) {
            if i > 1 {
                fact *= (i - 1) as f64;
            }
            let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
            *li = Complex64::new(sign * fact * ((y - 1.0).powi(-(i as i32)) - (y + 1.0).powi(-(i as i32))), 0.0);
        }
        let mut out = Vec::with_capacity(nd);
        let mut kfact = 1.0;
        for k in 0..nd {
            if k > 0 {
                kfact *= k as f64;
            }
            let mut v = rsum[k];
            let mut binom = 1.0;
            for i in 0..=k {
                v += gsum[i] * l[k - i] * binom;
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
            out.push(v / kfact);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_evaluates() {
        let xs = lobatto(33);
        let vals: Vec<Complex64> = xs.iter().map(|x| Complex64::new((2.0 * x).exp(), x * x)).collect();
        let c = Cheb::from_lobatto(&vals);
        for y in [-0.9f64, -0.3, 0.0, 0.45, 0.99] {
            let want = Complex64::new((2.0 * y).exp(), y * y);
            assert!((c.eval(y) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn cauchy_of_polynomial_matches_closed_form() {
        // g(s) = s²: Φ(y) = ∫ s²/(s − y − i0) = y² L(y) + ∫ (s + y) ds = y² L + 2y
        let xs = lobatto(9);
        let vals: Vec<Complex64> = xs.iter().map(|x| Complex64::new(x * x, 0.0)).collect();
        let c = Cheb::from_lobatto(&vals);
        let y = 0.3f64;
        let l = Complex64::new(((1.0 - y) / (1.0 + y)).ln(), PI);
        let out = c.cauchy_inside(y, 2);
        assert!((out[0] - (l * y * y + 2.0 * y)).norm() < 1e-13);
        // d/dy: 2y L + y² L' + 2, with L' = 1/(y−1) − 1/(y+1)
        let lp = 1.0 / (y - 1.0) - 1.0 / (y + 1.0);
        assert!((out[1] - (l * 2.0 * y + y * y * lp + 2.0)).norm() < 1e-12);
        // second-order kernel: Φ''/2 = (2L + 4y L' + y² L'')/2
        let lpp = -1.0 / (y - 1.0).powi(2) + 1.0 / (y + 1.0).powi(2);
        assert!((out[2] - (l * 2.0 + 4.0 * y * lp + y * y * lpp) * 0.5).norm() < 1e-12);
    }
}
