//! Radial grids on (0, 1] with P1 product-integration weights.
//!
//! A nodal function is read as the piecewise-linear interpolant of its values.
//! Weighted integrals use lumped weights `m_i(β) = ∫ φ_i(r) r^{N-1+β} dr`, where
//! `φ_i` is the hat function of node `i`, so that `∫_B |x|^β f ≈ ω_N Σ m_i(β) f_i`
//! is exact for piecewise-linear `f`. The Dirichlet form is the exact
//! `∫_B |∇u_h|²` of the interpolant.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;
use crate::math::{self, GaussLegendre};

/// Innermost positive node of a geometric grid when the origin is a node.
const GEOMETRIC_START: f64 = 1e-6;
/// Outer steps of a geometric grid are at most this multiple of `1/n`.
const GEOMETRIC_STEP_CAP: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Grading {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    dim: usize,
    alpha: f64,
    grading: Grading,
    nodes: Vec<f64>,
    sphere_area: f64,
    weights: Vec<f64>,
    stiffness: Vec<f64>,
}

impl RadialGrid {
    /// Builds a grid for dimension `dim` and Hénon exponent `alpha`.
    ///
    /// For `alpha < 0` the origin is excluded and the first node is chosen so
    /// that `∫_0^{r_0} r^{N-1+α} dr ≤ 1e-12`.
    pub fn new(dim: usize, alpha: f64, node_count: usize, grading: Grading) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidInput("dimension must be at least 3"));
        }
        if !(alpha > -2.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput("alpha must be finite and greater than -2"));
        }
        if node_count < 16 {
            return Err(Error::InvalidInput("node_count must be at least 16"));
        }
        let r0 = if alpha < 0.0 {
            let s = dim as f64 + alpha;
            math::powf(1e-12 * s, 1.0 / s).min(1e-8)
        } else {
            0.0
        };
        let nodes = match grading {
            Grading::Uniform => uniform_nodes(r0, node_count),
            Grading::Geometric => geometric_nodes(r0, node_count),
        };
        Ok(Self::from_nodes_unchecked(dim, alpha, grading, nodes))
    }

    /// Builds a grid from explicit nodes (strictly increasing, last node 1).
    pub fn from_nodes(dim: usize, alpha: f64, nodes: Vec<f64>) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidInput("dimension must be at least 3"));
        }
        if nodes.len() < 2 || nodes[0] < 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::InvalidInput("nodes must start at r >= 0 and end at 1"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("nodes must be strictly increasing"));
        }
        Ok(Self::from_nodes_unchecked(dim, alpha, Grading::Uniform, nodes))
    }

    fn from_nodes_unchecked(dim: usize, alpha: f64, grading: Grading, nodes: Vec<f64>) -> Self {
        let weights = hat_moments(&nodes, dim as f64 - 1.0);
        let stiffness = nodes.windows(2).map(|w| element_stiffness(w[0], w[1], dim)).collect();
        Self { dim, alpha, grading, nodes, sphere_area: math::sphere_area(dim), weights, stiffness }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn grading(&self) -> Grading {
        self.grading
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// ω_N, the area of the unit sphere.
    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }
    /// Lumped weights `m_i(0)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Per-element `∫_e r^{N-1} dr / h_e²`.
    pub fn stiffness(&self) -> &[f64] {
        &self.stiffness
    }

    /// Lumped weights `m_i(β)`; requires `β > -N`.
    pub fn weights_for(&self, beta: f64) -> Result<Vec<f64>> {
        if !(beta > -(self.dim as f64)) {
            return Err(Error::InvalidInput("beta must exceed -N"));
        }
        if beta == 0.0 {
            return Ok(self.weights.clone());
        }
        Ok(hat_moments(&self.nodes, self.dim as f64 - 1.0 + beta))
    }

    /// ∫_B |x|^β f(|x|) dx for nodal values `f`.
    pub fn integrate_weighted(&self, values: &[f64], beta: f64) -> Result<f64> {
        self.check_len(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("values must be finite"));
        }
        let w = self.weights_for(beta)?;
        Ok(self.sphere_area * dot(&w, values))
    }

    /// ∫_B |∇u|² for the piecewise-linear interpolant of `u`.
    pub fn dirichlet_energy(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u.len())?;
        let mut s = 0.0;
        for (e, k) in self.stiffness.iter().enumerate() {
            let d = u[e + 1] - u[e];
            s += k * d * d;
        }
        Ok(self.sphere_area * s)
    }

    /// Samples `f` at the nodes.
    pub fn sample<F: FnMut(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().copied().map(f).collect()
    }

    /// Piecewise-linear interpolation of nodal `values` at `r ∈ [0, 1]`.
    /// Below the first node the first value is used.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let x = &self.nodes;
        if r <= x[0] {
            return values[0];
        }
        if r >= 1.0 {
            return values[x.len() - 1];
        }
        let j = x.partition_point(|&v| v <= r) - 1;
        let t = (r - x[j]) / (x[j + 1] - x[j]);
        values[j] + t * (values[j + 1] - values[j])
    }

    /// Matrix of the Dirichlet form on the free nodes (all but r = 1), so that
    /// `dirichlet_energy(u) = uᵀ K u`.
    pub fn stiffness_matrix(&self) -> SymTridiagonal {
        let n = self.len() - 1;
        let w = self.sphere_area;
        let mut diag = alloc::vec![0.0; n];
        let mut off = alloc::vec![0.0; n - 1];
        for (e, k) in self.stiffness.iter().enumerate() {
            diag[e] += w * k;
            if e + 1 < n {
                diag[e + 1] += w * k;
                off[e] = -w * k;
            }
        }
        SymTridiagonal { diag, off }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n != self.nodes.len() {
            return Err(Error::GridMismatch { expected: self.nodes.len(), found: n });
        }
        Ok(())
    }
}

/// Nodal values of a radial function vanishing at r = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: &RadialGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("nodal values must be finite"));
        }
        if *values.last().unwrap() != 0.0 {
            return Err(Error::InvalidInput("radial function must vanish at r = 1"));
        }
        Ok(Self { values })
    }

    /// Samples `f` on the grid and sets the boundary value to zero.
    pub fn from_fn<F: FnMut(f64) -> f64>(grid: &RadialGrid, f: F) -> Self {
        let mut values = grid.sample(f);
        *values.last_mut().unwrap() = 0.0;
        Self { values }
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self { values: alloc::vec![0.0; grid.len()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn uniform_nodes(r0: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| r0 + (1.0 - r0) * i as f64 / (n - 1) as f64).collect();
    v[n - 1] = 1.0;
    v
}

/// Geometric steps from the innermost node until they reach the size of the
/// uniform step that fills the rest of (0, 1] with the remaining nodes.
fn geometric_nodes(r0: f64, n: usize) -> Vec<f64> {
    let (prefix, g0) = if r0 > 0.0 { (0, r0) } else { (1, GEOMETRIC_START) };
    let budget = n - prefix;
    let cap = GEOMETRIC_STEP_CAP / n as f64;
    // Log nodes g0 q^k while the step stays below the cap, then uniform steps
    // of at most the cap; the smallest ratio that fits the budget wins.
    let layout = |q: f64| -> (usize, f64, usize) {
        let switch = cap / (q - 1.0);
        let mut k = 1;
        let mut last = g0;
        while last * q < switch.min(1.0) {
            last *= q;
            k += 1;
        }
        (k, last, libm::ceil((1.0 - last) / cap) as usize)
    };
    let (mut lo, mut hi) = (1.0 + 1e-9, 4.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (k, _, u) = layout(mid);
        if k + u > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (k, last, _) = layout(hi);
    let uniform = budget - k;
    let mut v = Vec::with_capacity(n);
    if prefix == 1 {
        v.push(0.0);
    }
    let mut r = g0;
    for _ in 0..k {
        v.push(r);
        r *= hi;
    }
    let h = (1.0 - last) / uniform as f64;
    for i in 1..=uniform {
        v.push(last + h * i as f64);
    }
    v[n - 1] = 1.0;
    v
}

fn element_stiffness(a: f64, b: f64, dim: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..dim {
        s += math::powi(b, j as i32) * math::powi(a, (dim - 1 - j) as i32);
    }
    s / (dim as f64 * (b - a))
}

/// `m_i = ∫ φ_i r^k dr` for all hat functions on `nodes`, `k > -1`.
fn hat_moments(nodes: &[f64], k: f64) -> Vec<f64> {
    let gl = GaussLegendre::new(8);
    let mut m = alloc::vec![0.0; nodes.len()];
    for e in 0..nodes.len() - 1 {
        let (left, right) = element_moments(&gl, nodes[e], nodes[e + 1], k);
        m[e] += left;
        m[e + 1] += right;
    }
    m
}

/// (∫_a^b (b-r)/(b-a) r^k dr, ∫_a^b (r-a)/(b-a) r^k dr)
fn element_moments(gl: &GaussLegendre, a: f64, b: f64, k: f64) -> (f64, f64) {
    if a == 0.0 {
        let bk = math::powf(b, k + 1.0);
        let right = bk / (k + 2.0);
        return (bk / (k + 1.0) - right, right);
    }
    if b / a > 1.5 {
        let h = b - a;
        let i1 = (math::powf(b, k + 1.0) - math::powf(a, k + 1.0)) / (k + 1.0);
        let i2 = (math::powf(b, k + 2.0) - math::powf(a, k + 2.0)) / (k + 2.0);
        let right = (i2 - a * i1) / h;
        let left = (b * i1 - i2) / h;
        return (left, right);
    }
    let h = b - a;
    let mut left = 0.0;
    let mut right = 0.0;
    let c = 0.5 * (a + b);
    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
        let r = c + 0.5 * h * x;
        let f = w * math::powf(r, k);
        left += f * (b - r);
        right += f * (r - a);
    }
    (0.5 * left, 0.5 * right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn volume_of_ball() {
        let g = RadialGrid::new(3, 0.0, 1024, Grading::Uniform).unwrap();
        let one = alloc::vec![1.0; g.len()];
        let v = g.integrate_weighted(&one, 0.0).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_weight_on_geometric_grid() {
        let g = RadialGrid::new(4, -1.0, 512, Grading::Geometric).unwrap();
        assert!(g.nodes()[0] > 0.0);
        let one = alloc::vec![1.0; g.len()];
        let v = g.integrate_weighted(&one, -1.0).unwrap();
        let exact = math::sphere_area(4) / 3.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RadialGrid::new(2, 0.0, 100, Grading::Uniform).is_err());
        assert!(RadialGrid::new(3, -2.0, 100, Grading::Uniform).is_err());
        assert!(RadialGrid::new(3, 0.0, 15, Grading::Uniform).is_err());
        let g = RadialGrid::new(3, 0.0, 64, Grading::Uniform).unwrap();
        assert!(g.integrate_weighted(&alloc::vec![1.0; 64], -3.0).is_err());
        assert!(matches!(g.integrate_weighted(&alloc::vec![1.0; 63], 0.0), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn linear_functions_are_integrated_exactly() {
        for grading in [Grading::Uniform, Grading::Geometric] {
            let g = RadialGrid::new(5, 0.5, 200, grading).unwrap();
            let f = g.sample(|r| 2.0 - 3.0 * r);
            let v = g.integrate_weighted(&f, 0.5).unwrap();
            let w = math::sphere_area(5);
            let exact = w * (2.0 / 5.5 - 3.0 / 6.5);
            assert!((v - exact).abs() < 1e-12 * exact.abs(), "{grading:?}");
        }
    }

    #[test]
    fn dirichlet_energy_of_parabola() {
        let g = RadialGrid::new(3, 0.0, 2048, Grading::Uniform).unwrap();
        let u = RadialFunction::from_fn(&g, |r| 1.0 - r * r);
        let d = g.dirichlet_energy(u.values()).unwrap();
        assert!((d - 16.0 * PI / 5.0).abs() < 1e-5);
    }

    #[test]
    fn geometric_grid_is_graded_and_ends_at_one() {
        for n in [16, 64, 512, 4096] {
            for alpha in [-1.5, 0.0, 1.0] {
                let g = RadialGrid::new(3, alpha, n, Grading::Geometric).unwrap();
                assert_eq!(g.len(), n);
                assert_eq!(*g.nodes().last().unwrap(), 1.0);
                assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
                assert!(g.weights().iter().all(|&w| w > 0.0));
            }
        }
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let g = RadialGrid::new(3, 0.0, 32, Grading::Uniform).unwrap();
        let f = g.sample(|r| r * r);
        for (i, &r) in g.nodes().iter().enumerate() {
            assert!((g.interpolate(&f, r) - f[i]).abs() < 1e-15);
        }
    }
}
