//! Gauss-Legendre rules on the parent interval [-1, 1].

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_POINTS: usize = 10;

/// Abscissae and weights of a quadrature rule on [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// Integrates `f` over [-1, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Tensor-product points `(xi, eta, weight)` on [-1, 1]^2.
    pub fn tensor(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.len() * self.len());
        for (eta, we) in self.iter() {
            for (xi, wx) in self.iter() {
                out.push((xi, eta, wx * we));
            }
        }
        out
    }
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule with `n_points` abscissae, sorted ascending.
pub fn gauss_rule(n_points: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_POINTS).contains(&n_points) {
        return Err(Error::UnsupportedRule(n_points));
    }
    let n = n_points;
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        } else {
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
        }
        let dp = legendre(n, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = x;
        weights[i] = w;
        points[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    Ok(QuadratureRule { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn low_order_closed_forms() {
        let r1 = gauss_rule(1).unwrap();
        assert_eq!(r1.points, vec![0.0]);
        assert_abs_diff_eq!(r1.weights[0], 2.0, epsilon = 1e-15);

        let r2 = gauss_rule(2).unwrap();
        let g = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r2.points[0], -g, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.points[1], g, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights[0], 1.0, epsilon = 1e-15);

        let r3 = gauss_rule(3).unwrap();
        let s = (3.0f64 / 5.0).sqrt();
        assert_abs_diff_eq!(r3.points[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r3.points[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r3.weights[0], 5.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r3.weights[1], 8.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r3.integrate(|x| x.powi(4)), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(gauss_rule(0), Err(Error::UnsupportedRule(0)));
        assert_eq!(gauss_rule(11), Err(Error::UnsupportedRule(11)));
    }

    #[test]
    fn exactness_degree() {
        for n in 1..=MAX_POINTS {
            let rule = gauss_rule(n).unwrap();
            assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            // Odd monomials vanish by symmetry; check the top even one too.
            let top_odd = 2 * n - 1;
            assert_abs_diff_eq!(rule.integrate(|x| x.powi(top_odd as i32)), 0.0, epsilon = 1e-13);
            let even = 2 * n - 2;
            let exact = 2.0 / (even as f64 + 1.0);
            assert_abs_diff_eq!(rule.integrate(|x| x.powi(even as i32)), exact, epsilon = 1e-13);
            // x^(2n) is the first monomial it misses; the miss is a fixed
            // positive amount 2/(2n+1) - sum w x^(2n).
            let miss = 2.0 / (2.0 * n as f64 + 1.0) - rule.integrate(|x| x.powi(2 * n as i32));
            assert!(miss > 1e-6, "n = {n}: miss {miss}");
        }
    }

    #[test]
    fn integrates_shifted_polynomial_exactly() {
        // (x + 1/2)^(2n-1) has all lower-order terms, not just the leading one.
        for n in 1..=MAX_POINTS {
            let rule = gauss_rule(n).unwrap();
            let d = 2 * n - 1;
            let exact = (1.5f64.powi(d as i32 + 1) - (-0.5f64).powi(d as i32 + 1)) / (d as f64 + 1.0);
            assert_abs_diff_eq!(rule.integrate(|x| (x + 0.5).powi(d as i32)), exact, epsilon = 1e-12);
        }
    }
}
