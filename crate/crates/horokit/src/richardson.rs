//! Richardson extrapolation of `ε`-regularized values to `ε = 0`.

use num_complex::Complex64;

/// Extrapolated value and its estimated error.
#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolated {
    pub value: Vec<Complex64>,
    pub error: f64,
}

/// Powers of `ε` present in the error expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expansion {
    /// `ε, ε², ε³, …`
    Integer,
    /// `ε, ε^{3/2}, ε², ε^{5/2}, …`: a kernel pole approaching a tangency point.
    HalfInteger,
}

impl Expansion {
    fn power(self, j: usize) -> f64 {
        match self {
            Expansion::Integer => j as f64,
            Expansion::HalfInteger => 0.5 * (j + 1) as f64,
        }
    }
}

/// Neville tableau for values sampled at `ε₀ r^{-k}` with an error expansion in
/// integer powers of `ε`. `values[k]` is the vector at level `k`.
pub fn extrapolate(values: &[Vec<Complex64>], ratio: f64) -> Extrapolated {
    extrapolate_with(values, ratio, Expansion::Integer)
}

/// As [`extrapolate`], eliminating the powers of `expansion` in order.
pub fn extrapolate_with(values: &[Vec<Complex64>], ratio: f64, expansion: Expansion) -> Extrapolated {
    assert!(!values.is_empty());
    let len = values[0].len();
    let mut prev: Vec<Vec<Complex64>> = values.to_vec();
    let mut best = values[values.len() - 1].clone();
    let mut best_err = f64::INFINITY;
    if values.len() == 1 {
        return Extrapolated { value: best, error: f64::INFINITY };
    }
    // Diagonal entries T[k][k]; the error of T[k][k] is |T[k][k] − T[k][k−1]|.
    let mut diag_prev = values[0].clone();
    for j in 1..values.len() {
        let factor = ratio.powf(expansion.power(j));
        let next: Vec<Vec<Complex64>> = (1..prev.len())
            .map(|k| (0..len).map(|l| prev[k][l] + (prev[k][l] - prev[k - 1][l]) / (factor - 1.0)).collect())
            .collect();
        let diag = next[next.len() - 1].clone();
        let below = &prev[prev.len() - 1];
        let e1 = diff(&diag, below);
        let e2 = diff(&diag, &diag_prev);
        let err = e1.max(e2);
        if err <= best_err {
            best_err = err;
            best = diag.clone();
        }
        diag_prev = diag;
        prev = next;
    }
    Extrapolated { value: best, error: best_err }
}

fn diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// The geometric ladder `ε₀ 2^{-k}`, `k = 0..levels`.
pub fn ladder(eps0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| eps0 * 0.5f64.powi(k as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_polynomial_error() {
        let eps = ladder(0.1, 6);
        let vals: Vec<Vec<Complex64>> = eps
            .iter()
            .map(|e| vec![Complex64::new(2.0 + 3.0 * e - e * e + 0.5 * e.powi(3), -1.0 + e)])
            .collect();
        let r = extrapolate(&vals, 2.0);
        assert!((r.value[0] - Complex64::new(2.0, -1.0)).norm() < 1e-13);
    }

    #[test]
    fn removes_half_integer_error() {
        let eps = ladder(0.1, 7);
        let vals: Vec<Vec<Complex64>> =
            eps.iter().map(|e| vec![Complex64::new(1.0 + e - 2.0 * e.powf(1.5) + e * e, 0.0)]).collect();
        let r = extrapolate_with(&vals, 2.0, Expansion::HalfInteger);
        assert!((r.value[0].re - 1.0).abs() < 1e-12, "{:?}", r.value);
        let naive = extrapolate(&vals, 2.0);
        assert!((naive.value[0].re - 1.0).abs() > 1e-6);
    }
}
