//! Scalar expansion inequalities behind the path estimates for μ < 0, and
//! the sphere bound of the mountain-pass geometry.
//!
//! ```text
//! g(x, y)    = (x+y)² log(x+y)² − x² log x² − 2xy(log x² + 1)
//! f(p, x, y) = (x+y)^p − x^p − y^p − p x^{p−1} y
//! ```

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functional::{Functional, ProblemParams};
use crate::grid::{RadialFunction, RadialGrid};
use crate::math;

/// Below this ratio `y/x` the series forms are used.
const SERIES_CUTOFF: f64 = 0.1;
const SERIES_TERMS: usize = 24;

/// `(1+s)² log(1+s) − s` for `s ≥ 0`.
fn log_remainder(s: f64) -> f64 {
    if s >= SERIES_CUTOFF {
        return (1.0 + s) * (1.0 + s) * math::ln1p(s) - s;
    }
    // Coefficient of s^k in (1+s)² log(1+s) is a_k + 2a_{k−1} + a_{k−2},
    // a_j = (−1)^{j+1}/j; the s¹ term cancels.
    let a = |j: usize| {
        if j == 0 {
            0.0
        } else if j % 2 == 1 {
            1.0 / j as f64
        } else {
            -1.0 / j as f64
        }
    };
    let mut sum = 0.0;
    let mut pw = s * s;
    for k in 2..SERIES_TERMS {
        sum += (a(k) + 2.0 * a(k - 1) + a(k - 2)) * pw;
        pw *= s;
    }
    sum
}

pub fn g(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let lx = 2.0 * math::ln(x);
    let s = y / x;
    x * x * (lx * s * s + 2.0 * log_remainder(s))
}

/// `(1+s)^p − 1 − p s` for `0 ≤ s`.
fn binomial_remainder(p: f64, s: f64) -> f64 {
    if s >= SERIES_CUTOFF {
        return math::expm1(p * math::ln1p(s)) - p * s;
    }
    let mut coef = p * (p - 1.0) / 2.0;
    let mut pw = s * s;
    let mut sum = 0.0;
    for k in 2..SERIES_TERMS {
        sum += coef * pw;
        coef *= (p - k as f64) / (k as f64 + 1.0);
        pw *= s;
    }
    sum
}

pub fn f(p: f64, x: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let s = y / x;
    if s < SERIES_CUTOFF {
        math::powf(x, p) * (binomial_remainder(p, s) - math::powf(s, p))
    } else {
        math::powf(y, p) * math::expm1(p * math::ln1p(x / y)) - math::powf(x, p) - p * math::powf(x, p - 1.0) * y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpansionConstants {
    pub b1: f64,
    /// Smallest constant for the lower bound on `f`; `None` when
    /// `N ≥ 6 + 2α`, where that bound is not claimed.
    pub b2_lower: Option<f64>,
    /// Smallest constant for the upper bound on `|f|`.
    pub b2_upper: f64,
    /// One constant serving both `f` bounds.
    pub b2: f64,
    pub exponent: f64,
}

impl ExpansionConstants {
    pub fn finite(&self) -> bool {
        self.b1.is_finite() && self.b2.is_finite()
    }
}

/// Smallest nonnegative `B1`, `B2` for which the three bounds hold at every
/// `(x, y)` of the grids, with `x ∈ [l1, l2]`:
///
/// ```text
/// g(x,y) ≤ y^{2+β} + B1 y²
/// f(p,x,y) ≥ (p/2) L1 y^{p−1} − B2 y²                 (N < 6 + 2α)
/// |f(p,x,y)| ≤ (p²/2) L2^{p−2} y² + B2 L2 y^{p−1}
/// ```
pub fn expansion_inequalities(
    dim: usize,
    alpha: f64,
    beta: f64,
    l1: f64,
    l2: f64,
    x_grid: &[f64],
    y_grid: &[f64],
) -> Result<ExpansionConstants> {
    if x_grid.is_empty() || y_grid.is_empty() {
        return Err(Error::InvalidInput("grids must be nonempty"));
    }
    if !(beta > 0.0) || !(l1 > 0.0) || !(l2 >= l1) || !l2.is_finite() {
        return Err(Error::InvalidInput("need beta > 0 and 0 < L1 <= L2"));
    }
    if x_grid.iter().any(|&x| !(x >= l1 && x <= l2)) {
        return Err(Error::InvalidInput("x grid must lie in [L1, L2]"));
    }
    if y_grid.iter().any(|&y| !(y > 0.0) || !y.is_finite()) {
        return Err(Error::InvalidInput("y grid must be positive and finite"));
    }
    let p = crate::functional::critical_exponent(dim, alpha);
    let lower_claimed = (dim as f64) < 6.0 + 2.0 * alpha;
    let mut b1: f64 = 0.0;
    let mut b2_lower: f64 = 0.0;
    let mut b2_upper: f64 = 0.0;
    let quad = p * p / 2.0 * math::powf(l2, p - 2.0);
    for &x in x_grid {
        for &y in y_grid {
            let y2 = y * y;
            b1 = b1.max((g(x, y) - math::powf(y, 2.0 + beta)) / y2);
            let fv = f(p, x, y);
            let yp1 = math::powf(y, p - 1.0);
            if lower_claimed {
                b2_lower = b2_lower.max((p / 2.0 * l1 * yp1 - fv) / y2);
            }
            b2_upper = b2_upper.max((fv.abs() - quad * y2) / (l2 * yp1));
        }
    }
    let b2_lower = lower_claimed.then_some(b2_lower);
    Ok(ExpansionConstants { b1, b2_lower, b2_upper, b2: b2_upper.max(b2_lower.unwrap_or(0.0)), exponent: p })
}

/// `n` points evenly spaced on `[a, b]`.
pub fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// `n` points log-spaced on `[a, b]`, `a > 0`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (math::ln(a), math::ln(b));
    if n == 1 {
        return alloc::vec![a];
    }
    let mut v: Vec<f64> = (0..n).map(|i| math::exp(la + (lb - la) * i as f64 / (n - 1) as f64)).collect();
    v[0] = a;
    v[n - 1] = b;
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SphereBound {
    pub rho_mp: f64,
    pub sigma: f64,
    pub min_energy: f64,
    pub samples: usize,
}

impl SphereBound {
    pub fn holds(&self, slack: f64) -> bool {
        self.min_energy >= self.sigma - slack
    }
}

/// Least energy over the directions rescaled to `‖∇u‖ = ρ`.
pub fn sphere_bound(
    params: &ProblemParams,
    grid: &RadialGrid,
    rho_mp: f64,
    sigma: f64,
    directions: &[RadialFunction],
) -> Result<SphereBound> {
    if directions.is_empty() || !(rho_mp > 0.0) {
        return Err(Error::InvalidInput("need directions and rho_mp > 0"));
    }
    let fun = Functional::new(*params, grid)?;
    let mut min_energy = f64::INFINITY;
    for d in directions {
        let n = math::sqrt(fun.dirichlet(d.values()));
        if !(n > 0.0) {
            return Err(Error::InvalidInput("direction with zero gradient"));
        }
        let u: Vec<f64> = d.values().iter().map(|v| v * rho_mp / n).collect();
        min_energy = min_energy.min(fun.value(&u)?);
    }
    Ok(SphereBound { rho_mp, sigma, min_energy, samples: directions.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g_direct(x: f64, y: f64) -> f64 {
        let s = x + y;
        s * s * math::ln(s * s) - x * x * math::ln(x * x) - 2.0 * x * y * (math::ln(x * x) + 1.0)
    }

    #[test]
    fn vanish_at_zero_increment() {
        for x in [0.1, 1.0, 7.0] {
            assert_eq!(g(x, 0.0), 0.0);
            assert_eq!(f(4.0, x, 0.0), 0.0);
        }
    }

    #[test]
    fn series_matches_direct_form() {
        for &(x, y) in &[(1.0, 0.3), (0.5, 0.04), (2.0, 0.15), (1.0, 1e-3)] {
            let d = g_direct(x, y);
            assert!((g(x, y) - d).abs() <= 1e-9 * d.abs().max(1e-12), "{x} {y}");
        }
        for &(p, x, y) in &[(4.0, 1.0, 0.05), (6.0, 0.3, 0.01), (10.0 / 3.0, 2.0, 0.1999)] {
            let d = math::powf(x + y, p) - math::powf(x, p) - math::powf(y, p) - p * math::powf(x, p - 1.0) * y;
            assert!((f(p, x, y) - d).abs() <= 1e-8 * d.abs(), "{p} {x} {y}");
        }
    }

    #[test]
    fn integer_exponent_is_exact() {
        // p = 4: f = 6x²y² + 4xy³.
        let (x, y) = (0.7, 1e-4);
        let exact = 6.0 * x * x * y * y + 4.0 * x * y * y * y;
        assert!((f(4.0, x, y) - exact).abs() < 1e-15 * exact);
    }

    #[test]
    fn constants_are_finite() {
        let xs = linear_grid(0.1, 1.0, 16);
        let ys = log_grid(1e-8, 10.0, 200);
        let c = expansion_inequalities(4, 0.0, 0.5, 0.1, 1.0, &xs, &ys).unwrap();
        assert!(c.finite());
        assert!(c.b2_lower.is_some());
        let c = expansion_inequalities(7, 0.0, 0.5, 0.1, 1.0, &xs, &ys).unwrap();
        assert!(c.b2_lower.is_none());
        assert!(expansion_inequalities(4, 0.0, 0.5, 0.1, 1.0, &[], &ys).is_err());
        assert!(expansion_inequalities(4, 0.0, 0.5, 0.1, 1.0, &[2.0], &ys).is_err());
    }
}
