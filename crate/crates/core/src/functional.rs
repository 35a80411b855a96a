//! The energy functional
//!
//! ```text
//! I(u) = ½∫|∇u|² − (1/p)∫|x|^α u₊^p − (λ/2)∫u₊² − (μ/2)∫u₊²(log u₊² − 1),
//! ```
//!
//! with `p = 2*_α = 2(N+α)/(N−2)`, its first variation, the Nehari residual
//! `g(u) = ⟨I'(u), u⟩`, fiber maps and the logarithmic Sobolev check.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{dot, RadialFunction, RadialGrid};
use crate::linalg::SymTridiagonal;
use crate::math;

/// Below this magnitude `s² log s²` and `s log s²` are taken as 0.
pub const LOG_FLOOR: f64 = 1e-150;
/// Nodal magnitudes above this are rejected.
pub const OVERFLOW_GUARD: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProblemParams {
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub dim: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub log_floor: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, alpha: f64, lambda: f64, mu: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidInput("dimension must be at least 3"));
        }
        if !(alpha > -2.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput("alpha must be finite and greater than -2"));
        }
        if !lambda.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidInput("lambda and mu must be finite"));
        }
        Ok(Self { dim, alpha, lambda, mu, log_floor: LOG_FLOOR })
    }

    /// 2*_α = 2(N+α)/(N−2).
    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.dim, self.alpha)
    }

    /// |Ω| for the unit ball.
    pub fn ball_volume(&self) -> f64 {
        math::ball_volume(self.dim)
    }

    pub fn sphere_area(&self) -> f64 {
        math::sphere_area(self.dim)
    }
}

pub fn critical_exponent(dim: usize, alpha: f64) -> f64 {
    2.0 * (dim as f64 + alpha) / (dim as f64 - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyBreakdown {
    pub total: f64,
    pub kinetic: f64,
    pub critical: f64,
    pub quadratic: f64,
    pub logarithmic: f64,
    pub nehari: f64,
}

/// The four integrals from which `I(tu)` follows for every `t > 0`:
/// `‖∇u‖²`, `∫|x|^α u₊^p`, `∫u₊²` and `∫u₊² log u₊²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Integrals {
    pub dirichlet: f64,
    pub critical: f64,
    pub mass: f64,
    pub log_mass: f64,
}

impl Integrals {
    /// Energy terms and Nehari residual assembled from the integrals.
    pub fn breakdown(&self, params: &ProblemParams) -> EnergyBreakdown {
        let ProblemParams { lambda, mu, .. } = *params;
        let p = params.critical_exponent();
        let kinetic = 0.5 * self.dirichlet;
        let critical = self.critical / p;
        let quadratic = 0.5 * lambda * self.mass;
        let logarithmic = 0.5 * mu * (self.log_mass - self.mass);
        EnergyBreakdown {
            total: kinetic - critical - quadratic - logarithmic,
            kinetic,
            critical,
            quadratic,
            logarithmic,
            nehari: self.dirichlet - self.critical - lambda * self.mass - mu * self.log_mass,
        }
    }
}

/// Gauss points per element for the nonlinear terms.
const ELEMENT_POINTS: usize = 4;

/// The discrete functional on a fixed grid. The Dirichlet form is exact for
/// the interpolant and the nonlinear integrals use Gauss quadrature of the
/// interpolant on every element, so the discrete energy is the continuous
/// one restricted to piecewise-linear functions.
#[derive(Debug, Clone)]
pub struct Functional<'g> {
    params: ProblemParams,
    grid: &'g RadialGrid,
    stiffness: SymTridiagonal,
    /// Value of the left hat function at each Gauss point.
    hat: [f64; ELEMENT_POINTS],
    /// `ω_N w_g |e| r_g^{N−1+α}` per element and Gauss point.
    q_crit: Vec<f64>,
    /// `ω_N w_g |e| r_g^{N−1}` per element and Gauss point.
    q_mass: Vec<f64>,
    w_mass: Vec<f64>,
    p: f64,
}

impl<'g> Functional<'g> {
    pub fn new(params: ProblemParams, grid: &'g RadialGrid) -> Result<Self> {
        if grid.dim() != params.dim {
            return Err(Error::InvalidInput("grid dimension differs from problem dimension"));
        }
        if params.alpha < 0.0 && grid.nodes()[0] == 0.0 {
            return Err(Error::InvalidInput("alpha < 0 requires a grid that excludes the origin"));
        }
        let w = grid.sphere_area();
        let gl = math::GaussLegendre::new(ELEMENT_POINTS);
        let mut hat = [0.0; ELEMENT_POINTS];
        for (h, x) in hat.iter_mut().zip(&gl.nodes) {
            *h = 0.5 * (1.0 - x);
        }
        let k = params.dim as f64 - 1.0;
        let x = grid.nodes();
        let mut q_crit = Vec::with_capacity((x.len() - 1) * ELEMENT_POINTS);
        let mut q_mass = Vec::with_capacity((x.len() - 1) * ELEMENT_POINTS);
        for e in x.windows(2) {
            let half = 0.5 * (e[1] - e[0]);
            for g in 0..ELEMENT_POINTS {
                let r = e[0] + half * (1.0 + gl.nodes[g]);
                let base = w * gl.weights[g] * half * math::powf(r, k);
                q_mass.push(base);
                q_crit.push(base * math::powf(r, params.alpha));
            }
        }
        let w_mass = grid.weights().iter().map(|m| w * m).collect();
        Ok(Self {
            params,
            grid,
            stiffness: grid.stiffness_matrix(),
            hat,
            q_crit,
            q_mass,
            w_mass,
            p: params.critical_exponent(),
        })
    }

    /// Visits every Gauss point as `(element, left hat value, u_h, q_crit, q_mass)`.
    #[inline]
    fn for_points<F: FnMut(usize, f64, f64, f64, f64)>(&self, u: &[f64], mut f: F) {
        for e in 0..u.len() - 1 {
            let (a, b) = (u[e], u[e + 1]);
            for g in 0..ELEMENT_POINTS {
                let h = self.hat[g];
                let j = e * ELEMENT_POINTS + g;
                f(e, h, h * a + (1.0 - h) * b, self.q_crit[j], self.q_mass[j]);
            }
        }
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }
    pub fn grid(&self) -> &'g RadialGrid {
        self.grid
    }
    pub fn stiffness(&self) -> &SymTridiagonal {
        &self.stiffness
    }
    /// `ω_N m_i(0)`: lumped mass weights.
    pub fn mass_weights(&self) -> &[f64] {
        &self.w_mass
    }

    fn guard(&self, u: &[f64]) -> Result<()> {
        self.grid.check_len(u.len())?;
        for (node, &v) in u.iter().enumerate() {
            if !v.is_finite() || v.abs() > OVERFLOW_GUARD {
                return Err(Error::Overflow { node, value: v });
            }
        }
        Ok(())
    }

    pub fn integrals(&self, u: &[f64]) -> Result<Integrals> {
        self.guard(u)?;
        let eta = self.params.log_floor;
        let p = self.p;
        let mut critical = 0.0;
        let mut mass = 0.0;
        let mut log_mass = 0.0;
        self.for_points(u, |_, _, s, qc, qm| {
            if s <= 0.0 {
                return;
            }
            critical += qc * math::powf(s, p);
            let s2 = s * s;
            mass += qm * s2;
            if s >= eta {
                log_mass += qm * s2 * 2.0 * math::ln(s);
            }
        });
        let out = Integrals { dirichlet: self.dirichlet(u), critical, mass, log_mass };
        if !(out.dirichlet.is_finite() && critical.is_finite() && log_mass.is_finite()) {
            let node = argmax_abs(u);
            return Err(Error::Overflow { node, value: u[node] });
        }
        Ok(out)
    }

    /// ‖∇u‖² of the interpolant.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        let n = self.stiffness.len();
        dot(&self.stiffness.mul(&u[..n]), &u[..n])
    }

    pub fn energy(&self, u: &[f64]) -> Result<EnergyBreakdown> {
        Ok(self.breakdown(&self.integrals(u)?))
    }

    pub fn breakdown(&self, it: &Integrals) -> EnergyBreakdown {
        it.breakdown(&self.params)
    }

    /// Total energy only.
    pub fn value(&self, u: &[f64]) -> Result<f64> {
        Ok(self.energy(u)?.total)
    }

    pub fn nehari(&self, u: &[f64]) -> Result<f64> {
        Ok(self.energy(u)?.nehari)
    }

    /// Partial derivatives `∂I/∂u_i`; the boundary entry is 0. Pairing this
    /// vector with nodal values of `v` gives the directional derivative.
    pub fn derivative(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.guard(u)?;
        let n = self.stiffness.len();
        let ProblemParams { lambda, mu, log_floor, .. } = self.params;
        let p = self.p;
        let mut r = self.stiffness.mul(&u[..n]);
        r.push(0.0);
        self.for_points(u, |e, h, s, qc, qm| {
            if s <= 0.0 {
                return;
            }
            let mut reaction = lambda * s;
            if s >= log_floor {
                reaction += mu * s * 2.0 * math::ln(s);
            }
            let d = qc * math::powf(s, p - 1.0) + qm * reaction;
            r[e] -= h * d;
            r[e + 1] -= (1.0 - h) * d;
        });
        r[n] = 0.0;
        if r.iter().any(|v| !v.is_finite()) {
            let node = argmax_abs(u);
            return Err(Error::Overflow { node, value: u[node] });
        }
        Ok(r)
    }

    /// Nodal representer of `I'(u)` in the lumped L² inner product:
    /// `−Δ_h u − |x|^α u₊^{p−1} − λu₊ − μu₊ log u₊²`.
    pub fn gradient(&self, u: &[f64]) -> Result<RadialFunction> {
        let mut r = self.derivative(u)?;
        let n = r.len() - 1;
        for (v, w) in r[..n].iter_mut().zip(&self.w_mass) {
            *v /= w;
        }
        RadialFunction::new(self.grid, r)
    }

    /// `K⁻¹ r` on the free nodes: the H¹₀ Riesz representer of a derivative
    /// vector `r` (boundary entry 0).
    pub fn riesz(&self, r: &[f64]) -> Result<Vec<f64>> {
        let n = self.stiffness.len();
        let mut x = self.stiffness.solve_spd(&r[..n])?;
        x.push(0.0);
        Ok(x)
    }

    /// Dual norm `‖r‖_{H⁻¹} = (rᵀK⁻¹r)^{1/2}` of a derivative vector.
    pub fn dual_norm(&self, r: &[f64]) -> Result<f64> {
        let x = self.riesz(r)?;
        Ok(math::sqrt(dot(&x, r).max(0.0)))
    }

    /// `‖I'(u)‖` in the dual norm.
    pub fn residual(&self, u: &[f64]) -> Result<f64> {
        self.dual_norm(&self.derivative(u)?)
    }

    /// Jacobian of the derivative map on the free nodes as
    /// (lower, diag, upper).
    pub fn jacobian(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        self.guard(u)?;
        let n = self.stiffness.len();
        let ProblemParams { lambda, mu, log_floor, .. } = self.params;
        let p = self.p;
        let mut diag = self.stiffness.diag.clone();
        diag.push(0.0);
        let mut off = self.stiffness.off.clone();
        off.push(0.0);
        self.for_points(u, |e, h, s, qc, qm| {
            if s <= 0.0 {
                return;
            }
            let mut d = qc * (p - 1.0) * math::powf(s, p - 2.0) + qm * lambda;
            if s >= log_floor {
                d += qm * mu * (2.0 * math::ln(s) + 2.0);
            }
            diag[e] -= h * h * d;
            diag[e + 1] -= (1.0 - h) * (1.0 - h) * d;
            off[e] -= h * (1.0 - h) * d;
        });
        diag.truncate(n);
        off.truncate(n - 1);
        Ok((off.clone(), diag, off))
    }

    /// Position of the outermost local maximum of `t ↦ I(tu)`, the largest
    /// `t` where `h(t) = D − t^{p−2}C − λM − μL − μM log t²` changes sign from
    /// + to −. `None` when the fiber has no interior maximum.
    pub fn fiber_peak(&self, it: &Integrals) -> Option<f64> {
        let ProblemParams { lambda, mu, .. } = self.params;
        let p = self.p;
        if !(it.critical > 0.0) {
            return None;
        }
        let h = |lt: f64| {
            it.dirichlet
                - math::exp((p - 2.0) * lt) * it.critical
                - lambda * it.mass
                - mu * it.log_mass
                - 2.0 * mu * it.mass * lt
        };
        let mut lo = if mu < 0.0 {
            // h peaks where t^{p−2} = 2|μ|M / ((p−2)C).
            math::ln(2.0 * -mu * it.mass / ((p - 2.0) * it.critical)) / (p - 2.0)
        } else {
            -700.0 / p
        };
        if !(h(lo) > 0.0) {
            return None;
        }
        let mut hi = lo.max(0.0) + 1.0;
        while h(hi) > 0.0 {
            hi += 2.0 * (hi - lo).max(1.0);
            if hi > 700.0 {
                return None;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(math::exp(0.5 * (lo + hi)))
    }

    /// `I(tu)` from the scaling identity, given the integrals of `u ≥ 0`.
    pub fn fiber_value(&self, it: &Integrals, t: f64) -> f64 {
        let ProblemParams { lambda, mu, .. } = self.params;
        let lt = 2.0 * math::ln(t);
        let t2 = t * t;
        0.5 * t2 * it.dirichlet
            - math::powf(t, self.p) / self.p * it.critical
            - 0.5 * mu * t2 * lt * it.mass
            - 0.5 * t2 * (lambda * it.mass + mu * (it.log_mass - it.mass))
    }
}

fn argmax_abs(u: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in u.iter().enumerate() {
        if !v.is_finite() || v.abs() > u[best].abs() {
            best = i;
            if !v.is_finite() {
                break;
            }
        }
    }
    best
}

pub fn energy(params: &ProblemParams, grid: &RadialGrid, u: &RadialFunction) -> Result<EnergyBreakdown> {
    Functional::new(*params, grid)?.energy(u.values())
}

pub fn gradient(params: &ProblemParams, grid: &RadialGrid, u: &RadialFunction) -> Result<RadialFunction> {
    Functional::new(*params, grid)?.gradient(u.values())
}

pub fn nehari_residual(params: &ProblemParams, grid: &RadialGrid, u: &RadialFunction) -> Result<f64> {
    Functional::new(*params, grid)?.nehari(u.values())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ExtremeKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Extreme {
    pub t: f64,
    pub value: f64,
    pub kind: ExtremeKind,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FiberProfile {
    pub samples: Vec<(f64, f64)>,
    pub extremes: Vec<Extreme>,
}

impl FiberProfile {
    pub fn extreme_count(&self) -> usize {
        self.extremes.len()
    }
}

/// Dead-band applied to sampled differences when counting extremes,
/// relative to the larger of the two samples.
pub const FIBER_DEAD_BAND: f64 = 1e-12;

/// Samples `t ↦ I(tu)` and locates its discrete extremes.
pub fn fiber_profile(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialFunction,
    t_values: &[f64],
) -> Result<FiberProfile> {
    let f = Functional::new(*params, grid)?;
    let v = u.values();
    if v.iter().any(|&x| x < 0.0) || v.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidInput("fiber profile needs u >= 0, u != 0"));
    }
    if t_values.is_empty() || t_values[0] <= 0.0 || t_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("t values must be positive and increasing"));
    }
    let mut samples = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let tu: Vec<f64> = v.iter().map(|x| t * x).collect();
        samples.push((t, f.value(&tu)?));
    }
    Ok(FiberProfile { extremes: sampled_extremes(&samples), samples })
}

/// Sign changes of the sampled derivative, with a dead-band relative to
/// the neighbouring values.
pub fn sampled_extremes(samples: &[(f64, f64)]) -> Vec<Extreme> {
    let mut out = Vec::new();
    let mut last_sign = 0i8;
    let mut last_idx = 0usize;
    for k in 0..samples.len().saturating_sub(1) {
        let d = samples[k + 1].1 - samples[k].1;
        let band = FIBER_DEAD_BAND * samples[k].1.abs().max(samples[k + 1].1.abs());
        let sign = if d > band {
            1
        } else if d < -band {
            -1
        } else {
            0
        };
        if sign == 0 {
            continue;
        }
        if last_sign != 0 && sign != last_sign {
            let kind = if last_sign < 0 { ExtremeKind::Min } else { ExtremeKind::Max };
            let (t, value) = samples[best_between(samples, last_idx + 1, k, kind)];
            out.push(Extreme { t, value, kind });
        }
        last_sign = sign;
        last_idx = k;
    }
    out
}

fn best_between(samples: &[(f64, f64)], lo: usize, hi: usize, kind: ExtremeKind) -> usize {
    let mut best = lo;
    for j in lo..=hi {
        let better = match kind {
            ExtremeKind::Min => samples[j].1 < samples[best].1,
            ExtremeKind::Max => samples[j].1 > samples[best].1,
        };
        if better {
            best = j;
        }
    }
    best
}

/// Smallest slack of
/// `∫u² log u² ≤ (a/π)‖∇u‖² + (log|u|₂² − N(1 + log a))|u|₂²`
/// over the supplied `a`.
pub fn log_sobolev_check(grid: &RadialGrid, u: &RadialFunction, a_values: &[f64]) -> Result<f64> {
    let v = u.values();
    grid.check_len(v.len())?;
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidInput("log-Sobolev check needs u != 0"));
    }
    if a_values.is_empty() || a_values.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidInput("a values must be positive"));
    }
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let lsq: Vec<f64> =
        v.iter().map(|&x| if x.abs() < LOG_FLOOR { 0.0 } else { x * x * 2.0 * math::ln(x.abs()) }).collect();
    let l2 = grid.integrate_weighted(&sq, 0.0)?;
    let lhs = grid.integrate_weighted(&lsq, 0.0)?;
    let grad = grid.dirichlet_energy(v)?;
    let n = grid.dim() as f64;
    let mut worst = f64::INFINITY;
    for &a in a_values {
        let rhs = a / PI * grad + (math::ln(l2) - n * (1.0 + math::ln(a))) * l2;
        worst = worst.min(rhs - lhs);
    }
    Ok(worst)
}
