//! Numerical core for the critical Hardy–Hénon equation with a logarithmic
//! perturbation on the unit ball,
//!
//! ```text
//! -Δu = |x|^α u^(2*_α - 1) + μ u log u² + λ u,   u = 0 on ∂B,
//! ```
//!
//! restricted to radial functions. Everything here is `no_std` (with `alloc`);
//! file formats and the command line live in the companion `henon-lab` crate.

#![no_std]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bubbles;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod functional;
pub mod grid;
pub mod inequalities;
pub mod linalg;
pub mod math;
pub mod regions;
pub mod shooting;
pub mod solvers;

pub use error::{Error, Result};
pub use functional::{EnergyBreakdown, Functional, ProblemParams};
pub use grid::{Grading, RadialFunction, RadialGrid};
