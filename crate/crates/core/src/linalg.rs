//! Tridiagonal solvers.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = A[i][i+1]`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }
    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = alloc::vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Cholesky-free Thomas solve; the matrix must be positive definite.
    pub fn solve_spd(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = alloc::vec![0.0; n];
        let mut d = alloc::vec![0.0; n];
        let mut piv = self.diag[0];
        if !(piv > 0.0) {
            return Err(Error::InvalidInput("matrix is not positive definite"));
        }
        c[0] = if n > 1 { self.off[0] / piv } else { 0.0 };
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.off[i - 1] * c[i - 1];
            if !(piv > 0.0) {
                return Err(Error::InvalidInput("matrix is not positive definite"));
            }
            c[i] = if i + 1 < n { self.off[i] / piv } else { 0.0 };
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

/// Solves a general tridiagonal system by Gaussian elimination with partial
/// pivoting. `lower[i] = A[i+1][i]`, `upper[i] = A[i][i+1]`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut dl: Vec<f64> = lower.to_vec();
    let mut d: Vec<f64> = diag.to_vec();
    let mut du: Vec<f64> = upper.to_vec();
    let mut du2 = alloc::vec![0.0; n.saturating_sub(2)];
    let mut b: Vec<f64> = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                return Err(Error::InvalidInput("singular tridiagonal matrix"));
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            if i + 2 < n {
                du2[i] = 0.0;
            }
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
        dl[i] = 0.0;
    }
    if d[n - 1] == 0.0 {
        return Err(Error::InvalidInput("singular tridiagonal matrix"));
    }
    let mut x = alloc::vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n > 1 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("singular tridiagonal matrix"));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn pivoted_solve_handles_zero_diagonal() {
        let lower = [1.0, 2.0, -1.0, 0.5];
        let diag = [0.0, 1e-3, 3.0, 0.0, 2.0];
        let upper = [2.0, -1.0, 1.0, 4.0];
        let x0 = [1.0, -2.0, 0.5, 3.0, -1.0];
        let b = apply(&lower, &diag, &upper, &x0);
        let x = solve_tridiagonal(&lower, &diag, &upper, &b).unwrap();
        for (a, e) in x.iter().zip(&x0) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn spd_solve_roundtrip() {
        let m = SymTridiagonal { diag: alloc::vec![2.0; 50], off: alloc::vec![-1.0; 49] };
        let x0: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let b = m.mul(&x0);
        let x = m.solve_spd(&b).unwrap();
        for (a, e) in x.iter().zip(&x0) {
            assert!((a - e).abs() < 1e-10);
        }
    }
}
