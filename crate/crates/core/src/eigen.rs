//! First Dirichlet eigenpair of the radial Laplacian.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{dot, RadialFunction, RadialGrid};

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12, max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda1: f64,
    /// Positive, normalized so that ∫φ₁² = 1.
    pub phi1: RadialFunction,
    pub iterations: usize,
}

pub fn first_eigenpair(grid: &RadialGrid) -> Result<Eigenpair> {
    first_eigenpair_with(grid, &EigenOptions::default())
}

/// Inverse iteration on `K φ = λ M φ` with the lumped mass `M`.
pub fn first_eigenpair_with(grid: &RadialGrid, opts: &EigenOptions) -> Result<Eigenpair> {
    let k = grid.stiffness_matrix();
    let n = k.len();
    let mass: Vec<f64> = grid.weights()[..n].iter().map(|m| m * grid.sphere_area()).collect();
    let mut x: Vec<f64> = grid.nodes()[..n].iter().map(|r| 1.0 - r * r).collect();
    normalize(&mut x, &mass);
    let mut lambda = rayleigh(&k.mul(&x), &x, &mass);
    for it in 1..=opts.max_iterations {
        let rhs: Vec<f64> = x.iter().zip(&mass).map(|(a, m)| a * m).collect();
        let mut y = k.solve_spd(&rhs)?;
        normalize(&mut y, &mass);
        let next = rayleigh(&k.mul(&y), &y, &mass);
        x = y;
        let change = (next - lambda).abs();
        lambda = next;
        if change <= opts.tolerance * lambda {
            let mut values = x;
            let sign = if values[0] < 0.0 { -1.0 } else { 1.0 };
            values.iter_mut().for_each(|v| *v *= sign);
            values.push(0.0);
            let phi1 = RadialFunction::new(grid, values)?;
            return Ok(Eigenpair { lambda1: lambda, phi1, iterations: it });
        }
    }
    Err(Error::NotConverged { what: "inverse iteration", iterations: opts.max_iterations, residual: lambda })
}

/// Richardson extrapolation of a quantity with error `C h^order`, given its
/// values at mesh widths `h` and `h/2`.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> f64 {
    let f = libm::pow(2.0, order);
    (f * fine - coarse) / (f - 1.0)
}

fn normalize(x: &mut [f64], mass: &[f64]) {
    let s = libm::sqrt(x.iter().zip(mass).map(|(a, m)| a * a * m).sum::<f64>());
    x.iter_mut().for_each(|v| *v /= s);
}

fn rayleigh(kx: &[f64], x: &[f64], mass: &[f64]) -> f64 {
    let den: f64 = x.iter().zip(mass).map(|(a, m)| a * a * m).sum();
    dot(kx, x) / den
}
