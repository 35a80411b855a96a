//! Bubble profiles
//!
//! ```text
//! u_ε(r) = C ε^{(N−2)/2} / (ε^{2+α} + r^{2+α})^{(N−2)/(2+α)},
//! C = [(N+α)(N−2)]^{(N−2)/(2(2+α))},
//! ```
//!
//! which solve `−Δu = |x|^α u^{2*_α−1}` in ℝᴺ, their cut-off versions
//! `U_ε = φ u_ε`, the best constant `S_α` and quadrature of the small-ε
//! behaviour of integrals of `U_ε`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::functional::critical_exponent;
use crate::grid::{RadialFunction, RadialGrid};
use crate::math::{self, GaussLegendre};

/// Relative size of the truncated tail series accepted by [`best_constant`].
pub const TAIL_TOLERANCE: f64 = 1e-12;
/// Panel width in `log r` for composite quadrature.
const PANEL: f64 = 0.2;
/// Below `ε·INNER` integrands are replaced by their value at the origin.
const INNER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BubbleSpec {
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub dim: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub rho_cut: f64,
}

impl BubbleSpec {
    pub fn new(dim: usize, alpha: f64, epsilon: f64, rho_cut: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidInput("dimension must be at least 3"));
        }
        if !(alpha > -2.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput("alpha must be finite and greater than -2"));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidInput("epsilon must be positive"));
        }
        if !(rho_cut > 0.0 && rho_cut <= 0.5) {
            return Err(Error::InvalidInput("rho_cut must lie in (0, 1/2]"));
        }
        Ok(Self { dim, alpha, epsilon, rho_cut })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.dim, self.alpha, epsilon, self.rho_cut)
    }

    /// C_{α,N}.
    pub fn constant(&self) -> f64 {
        bubble_constant(self.dim, self.alpha)
    }

    pub fn exponent(&self) -> f64 {
        critical_exponent(self.dim, self.alpha)
    }

    fn n(&self) -> f64 {
        self.dim as f64
    }

    /// log(ε^{2+α} + r^{2+α}) without overflow or cancellation.
    fn log_s(&self, r: f64) -> f64 {
        let a = 2.0 + self.alpha;
        let e = self.epsilon;
        if r <= e {
            a * math::ln(e) + math::ln1p(math::powf(r / e, a))
        } else {
            a * math::ln(r) + math::ln1p(math::powf(e / r, a))
        }
    }

    pub fn ln_value(&self, r: f64) -> f64 {
        let n = self.n();
        math::ln(self.constant()) + 0.5 * (n - 2.0) * math::ln(self.epsilon)
            - (n - 2.0) / (2.0 + self.alpha) * self.log_s(r)
    }

    /// u_ε(r).
    pub fn value(&self, r: f64) -> f64 {
        math::exp(self.ln_value(r))
    }

    /// r^{1+α}/(ε^{2+α} + r^{2+α}).
    fn ratio(&self, r: f64) -> f64 {
        if r == 0.0 {
            return math::powf(0.0, 1.0 + self.alpha) / math::powf(self.epsilon, 2.0 + self.alpha);
        }
        1.0 / (r * (1.0 + math::powf(self.epsilon / r, 2.0 + self.alpha)))
    }

    /// u_ε'(r) = −(N−2) u r^{1+α}/(ε^{2+α}+r^{2+α}).
    pub fn derivative(&self, r: f64) -> f64 {
        -(self.n() - 2.0) * self.value(r) * self.ratio(r)
    }

    /// u_ε''(r), for r > 0.
    pub fn second_derivative(&self, r: f64) -> f64 {
        let v = self.ratio(r);
        -(self.n() - 2.0) * self.value(r) * v * ((1.0 + self.alpha) / r - (self.n() + self.alpha) * v)
    }

    /// Quintic smoothstep cutoff: 1 on [0, ρ], 0 beyond 2ρ.
    pub fn cutoff(&self, r: f64) -> f64 {
        let rho = self.rho_cut;
        if r <= rho {
            1.0
        } else if r >= 2.0 * rho {
            0.0
        } else {
            let t = (r - rho) / rho;
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }

    pub fn cutoff_derivative(&self, r: f64) -> f64 {
        let rho = self.rho_cut;
        if r <= rho || r >= 2.0 * rho {
            0.0
        } else {
            let t = (r - rho) / rho;
            -30.0 * t * t * (1.0 - t) * (1.0 - t) / rho
        }
    }

    /// U_ε(r) = φ(r) u_ε(r).
    pub fn cutoff_value(&self, r: f64) -> f64 {
        let c = self.cutoff(r);
        if c == 0.0 {
            0.0
        } else {
            c * self.value(r)
        }
    }

    pub fn cutoff_slope(&self, r: f64) -> f64 {
        let c = self.cutoff(r);
        if c == 0.0 {
            return 0.0;
        }
        self.cutoff_derivative(r) * self.value(r) + c * self.derivative(r)
    }

    /// `U_ε` sampled on a grid (needs 2ρ ≤ 1, so the boundary value is 0).
    pub fn sample(&self, grid: &RadialGrid) -> RadialFunction {
        RadialFunction::from_fn(grid, |r| self.cutoff_value(r))
    }
}

pub fn bubble_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    math::powf((n + alpha) * (n - 2.0), (n - 2.0) / (2.0 * (2.0 + alpha)))
}

pub fn bubble_value(spec: &BubbleSpec, r: f64) -> f64 {
    spec.value(r)
}

/// ∫_lo^hi f(r) dr with Gauss–Legendre panels uniform in log r, split at
/// `breaks`.
pub fn log_quad<F: FnMut(f64) -> f64>(gl: &GaussLegendre, lo: f64, hi: f64, breaks: &[f64], mut f: F) -> f64 {
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(lo);
    let mut b: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.extend(b);
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, c) = (math::ln(w[0]), math::ln(w[1]));
        let panels = libm::ceil((c - a) / PANEL).max(1.0) as usize;
        let h = (c - a) / panels as f64;
        for k in 0..panels {
            let s0 = a + h * k as f64;
            total += gl.integrate(s0, s0 + h, |s| {
                let r = math::exp(s);
                f(r) * r
            });
        }
    }
    total
}

/// Σ_j binom(−m, j) x^j / (a0 + j·step) with its truncation remainder.
fn tail_series(a0: f64, m: f64, step: f64, x: f64) -> Result<(f64, f64)> {
    if !(x < 0.5) {
        return Err(Error::InsufficientExtent { tail: x, tolerance: 0.5 });
    }
    let mut coef = 1.0;
    let mut sum = 0.0;
    let mut last = 0.0;
    for j in 0..200 {
        let term = coef / (a0 + j as f64 * step);
        sum += term;
        last = term.abs();
        if last < 1e-18 * sum.abs() {
            break;
        }
        coef *= -(m + j as f64) / (j as f64 + 1.0) * x;
    }
    Ok((sum, last))
}

/// ∫_R^∞ u_ε'² r^{N−1} dr and its truncation bound.
fn gradient_tail(spec: &BubbleSpec, r: f64) -> Result<(f64, f64)> {
    let n = spec.n();
    let a = 2.0 + spec.alpha;
    let k = (n - 2.0) / a;
    let c = spec.constant();
    let x = math::powf(spec.epsilon / r, a);
    let pre = (n - 2.0) * (n - 2.0) * c * c * math::powf(spec.epsilon / r, n - 2.0);
    let (s, rem) = tail_series(n - 2.0, 2.0 * k + 2.0, a, x)?;
    Ok((pre * s, pre * rem))
}

/// ∫_R^∞ r^{N−1+α} u_ε^{2*_α} dr and its truncation bound.
fn critical_tail(spec: &BubbleSpec, r: f64) -> Result<(f64, f64)> {
    let n = spec.n();
    let a = 2.0 + spec.alpha;
    let p = spec.exponent();
    let c = spec.constant();
    let x = math::powf(spec.epsilon / r, a);
    let pre = math::powf(c, p) * math::powf(spec.epsilon / r, n + spec.alpha);
    let (s, rem) = tail_series(n + spec.alpha, p * (n - 2.0) / a, a, x)?;
    Ok((pre * s, pre * rem))
}

/// The two integrals of the Rayleigh quotient for the whole-space bubble.
fn whole_space_integrals(spec: &BubbleSpec, r_max: f64) -> Result<(f64, f64)> {
    let n = spec.n();
    let gl = GaussLegendre::new(16);
    let lo = spec.epsilon * INNER;
    let p = spec.exponent();
    let breaks = [spec.epsilon];
    let grad = log_quad(&gl, lo, r_max, &breaks, |r| {
        let d = spec.derivative(r);
        d * d * math::powf(r, n - 1.0)
    });
    let crit =
        log_quad(&gl, lo, r_max, &breaks, |r| math::exp(p * spec.ln_value(r) + (n - 1.0 + spec.alpha) * math::ln(r)))
            + math::exp(p * spec.ln_value(0.0) + (n + spec.alpha) * math::ln(lo)) / (n + spec.alpha);
    let (tg, rg) = gradient_tail(spec, r_max)?;
    let (tc, rc) = critical_tail(spec, r_max)?;
    let worst = (rg / (grad + tg)).max(rc / (crit + tc));
    if worst > TAIL_TOLERANCE {
        return Err(Error::InsufficientExtent { tail: worst, tolerance: TAIL_TOLERANCE });
    }
    let w = math::sphere_area(spec.dim);
    Ok((w * (grad + tg), w * (crit + tc)))
}

/// Rayleigh quotient `∫|∇u_ε|² / (∫|x|^α u_ε^{2*_α})^{2/2*_α}` by quadrature
/// on [0, R_max] plus the tail series beyond `R_max`.
pub fn best_constant(alpha: f64, dim: usize, r_max: f64, epsilon: f64) -> Result<f64> {
    let spec = BubbleSpec::new(dim, alpha, epsilon, 0.5)?;
    if !(r_max >= 1e3 * epsilon) {
        return Err(Error::InvalidInput("R_max must be at least 1e3 * epsilon"));
    }
    let (g, c) = whole_space_integrals(&spec, r_max)?;
    Ok(g / math::powf(c, 2.0 / spec.exponent()))
}

/// `S_α` at the default extent (ε = 1, R_max = 1e4).
pub fn sobolev_constant(alpha: f64, dim: usize) -> Result<f64> {
    best_constant(alpha, dim, 1e4, 1.0)
}

/// Largest normalized residual of `−u'' − (N−1)u'/r − r^α u^{2*_α−1}` over a
/// log-spaced sample of r ∈ [1e-4 ε, min(1, 1e4 ε)], each point divided by
/// the sum of the magnitudes of the three terms.
pub fn verify_bubble_pde(spec: &BubbleSpec) -> f64 {
    let n = spec.n();
    let p = spec.exponent();
    let lo = math::ln(1e-4 * spec.epsilon);
    let hi = math::ln((1e4 * spec.epsilon).min(1.0));
    let samples = 400;
    let mut worst = 0.0f64;
    for k in 0..=samples {
        let r = math::exp(lo + (hi - lo) * k as f64 / samples as f64);
        let t1 = -spec.second_derivative(r);
        let t2 = -(n - 1.0) * spec.derivative(r) / r;
        let t3 = -math::exp((p - 1.0) * spec.ln_value(r) + spec.alpha * math::ln(r));
        let res = (t1 + t2 + t3).abs() / (t1.abs() + t2.abs() + t3.abs());
        worst = worst.max(res);
    }
    worst
}

/// ∫_B |x|^β U_ε^q.
pub fn cutoff_integral(spec: &BubbleSpec, q: f64, beta: f64) -> f64 {
    let n = spec.n();
    let gl = GaussLegendre::new(16);
    let lo = spec.epsilon * INNER;
    let hi = 2.0 * spec.rho_cut;
    let body = log_quad(&gl, lo, hi, &[spec.epsilon, spec.rho_cut], |r| {
        let c = spec.cutoff(r);
        if c == 0.0 {
            return 0.0;
        }
        math::exp(q * (spec.ln_value(r) + math::ln(c)) + (n - 1.0 + beta) * math::ln(r))
    });
    let inner = math::exp(q * spec.ln_value(0.0) + (n + beta) * math::ln(lo)) / (n + beta);
    math::sphere_area(spec.dim) * (body + inner)
}

/// ∫_B |∇U_ε|².
pub fn cutoff_dirichlet(spec: &BubbleSpec) -> f64 {
    let n = spec.n();
    let gl = GaussLegendre::new(16);
    let body = log_quad(&gl, spec.epsilon * INNER, 2.0 * spec.rho_cut, &[spec.epsilon, spec.rho_cut], |r| {
        let d = spec.cutoff_slope(r);
        d * d * math::powf(r, n - 1.0)
    });
    math::sphere_area(spec.dim) * body
}

/// `∫|∇U_ε|² − S_α^{(N+α)/(2+α)}`, computed from r ≥ ρ only.
pub fn dirichlet_deficit(spec: &BubbleSpec) -> Result<f64> {
    let n = spec.n();
    let gl = GaussLegendre::new(16);
    let rho = spec.rho_cut;
    let band = log_quad(&gl, rho, 2.0 * rho, &[], |r| {
        let d = spec.cutoff_slope(r);
        let e = spec.derivative(r);
        (d * d - e * e) * math::powf(r, n - 1.0)
    });
    let (tail, _) = gradient_tail(spec, 2.0 * rho)?;
    Ok(math::sphere_area(spec.dim) * (band - tail))
}

/// `∫|x|^α U_ε^{2*_α} − S_α^{(N+α)/(2+α)}`, computed from r ≥ ρ only.
pub fn critical_deficit(spec: &BubbleSpec) -> Result<f64> {
    let n = spec.n();
    let p = spec.exponent();
    let gl = GaussLegendre::new(16);
    let rho = spec.rho_cut;
    let band = log_quad(&gl, rho, 2.0 * rho, &[], |r| {
        let c = spec.cutoff(r);
        let lost = -math::expm1(p * math::ln(c.max(f64::MIN_POSITIVE)));
        math::exp(p * spec.ln_value(r) + (n - 1.0 + spec.alpha) * math::ln(r)) * lost
    });
    let (tail, _) = critical_tail(spec, 2.0 * rho)?;
    Ok(-math::sphere_area(spec.dim) * (band + tail))
}

/// ∫_B U_ε² log U_ε².
pub fn log_moment_value(spec: &BubbleSpec) -> f64 {
    let n = spec.n();
    let gl = GaussLegendre::new(16);
    let lo = spec.epsilon * INNER;
    let body = log_quad(&gl, lo, 2.0 * spec.rho_cut, &[spec.epsilon, spec.rho_cut], |r| {
        let c = spec.cutoff(r);
        if c == 0.0 {
            return 0.0;
        }
        let l = spec.ln_value(r) + math::ln(c);
        2.0 * l * math::exp(2.0 * l + (n - 1.0) * math::ln(r))
    });
    let l0 = spec.ln_value(0.0);
    let inner = 2.0 * l0 * math::exp(2.0 * l0 + n * math::ln(lo)) / n;
    math::sphere_area(spec.dim) * (body + inner)
}

/// Geometric ε sequence `eps_max·10^{−k/4}`, k = 0..=4·decades.
pub fn epsilon_sequence(eps_max: f64, decades: usize) -> Vec<f64> {
    (0..=4 * decades).map(|k| eps_max * math::powf(10.0, -(k as f64) / 4.0)).collect()
}

/// Tolerance on fitted exponents for pure power laws.
pub const SLOPE_TOLERANCE: f64 = 0.05;
/// Minimum R² for a logarithmic correction to count as detected.
pub const LOG_FIT_R2: f64 = 0.99;
/// Number of largest ε dropped before fitting.
pub const PRE_ASYMPTOTIC_DROP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RateVerdict {
    PowerLawConfirmed,
    LogCaseConfirmed,
    Mismatch,
    Inconclusive,
}

impl RateVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            RateVerdict::PowerLawConfirmed => "power-law confirmed",
            RateVerdict::LogCaseConfirmed => "log-case confirmed",
            RateVerdict::Mismatch => "mismatch",
            RateVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateReport {
    pub q: f64,
    pub weighted: bool,
    /// (ε, ∫|x|^β U_ε^q) for every ε supplied.
    pub values: Vec<(f64, f64)>,
    pub predicted: f64,
    pub fitted: Option<LineFit>,
    /// Fit of value/ε^{predicted} against log(1/ε).
    pub log_fit: Option<LineFit>,
    pub log_case_expected: bool,
    pub log_detected: bool,
    pub verdict: RateVerdict,
}

/// Fits the small-ε exponent of `∫|x|^β U_ε^q`, with β = α when `weighted`
/// and β = 0 otherwise.
pub fn asymptotic_rate(
    alpha: f64,
    dim: usize,
    q: f64,
    weighted: bool,
    epsilons: &[f64],
    rho_cut: f64,
) -> Result<RateReport> {
    let n = dim as f64;
    let beta = if weighted { alpha } else { 0.0 };
    let upper = if weighted { critical_exponent(dim, alpha) } else { critical_exponent(dim, 0.0) };
    if !(q >= 1.0 && q < upper) {
        return Err(Error::InvalidInput("q must satisfy 1 <= q < critical exponent"));
    }
    let template = BubbleSpec::new(dim, alpha, 0.1, rho_cut)?;
    let mut values = Vec::with_capacity(epsilons.len());
    for &e in epsilons {
        let spec = template.with_epsilon(e)?;
        values.push((e, cutoff_integral(&spec, q, beta)));
    }
    let half = q * (n - 2.0) / 2.0;
    let predicted = half.min(n + beta - half);
    let q_log = (n + beta) / (n - 2.0);
    let log_case_expected = (q - q_log).abs() < 1e-9;
    let (fitted, log_fit, usable) = fit_rates(&values, predicted);
    let log_detected = log_fit.is_some_and(|f| log_dominant(&f, &values));
    let verdict = if !usable {
        RateVerdict::Inconclusive
    } else if log_case_expected {
        if log_detected {
            RateVerdict::LogCaseConfirmed
        } else {
            RateVerdict::Mismatch
        }
    } else if fitted.is_some_and(|f| (f.slope - predicted).abs() <= SLOPE_TOLERANCE) && !log_detected {
        RateVerdict::PowerLawConfirmed
    } else {
        RateVerdict::Mismatch
    };
    Ok(RateReport { q, weighted, values, predicted, fitted, log_fit, log_case_expected, log_detected, verdict })
}

fn fit_rates(values: &[(f64, f64)], predicted: f64) -> (Option<LineFit>, Option<LineFit>, bool) {
    let tail: Vec<(f64, f64)> = sorted_tail(values);
    let usable = tail.len() >= 4 && tail.iter().all(|(e, v)| *v > 0.0 && v.is_finite() && *e > 0.0) && {
        let (lo, hi) = (tail.last().unwrap().0, tail[0].0);
        math::ln(hi / lo) >= 3.0 * core::f64::consts::LN_10 * 0.75
    };
    if !usable {
        return (None, None, false);
    }
    let x: Vec<f64> = tail.iter().map(|(e, _)| math::ln(*e)).collect();
    let y: Vec<f64> = tail.iter().map(|(_, v)| math::ln(*v)).collect();
    let fitted = fit_line(&x, &y);
    let lx: Vec<f64> = tail.iter().map(|(e, _)| -math::ln(*e)).collect();
    let ly: Vec<f64> = tail.iter().map(|(e, v)| v / math::powf(*e, predicted)).collect();
    let log_fit = fit_line(&lx, &ly);
    let usable = fitted.is_some_and(|f| f.r_squared > 0.9);
    (fitted, log_fit, usable)
}

/// The ε-ordered values with the largest `PRE_ASYMPTOTIC_DROP` removed.
fn sorted_tail(values: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = values.to_vec();
    v.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    v.into_iter().skip(PRE_ASYMPTOTIC_DROP).collect()
}

/// A log correction counts when its coefficient is positive, the linear fit
/// in log(1/ε) is good and the log term carries at least half the value at
/// the smallest ε.
fn log_dominant(f: &LineFit, values: &[(f64, f64)]) -> bool {
    let e_min = values.iter().fold(f64::INFINITY, |m, v| m.min(v.0));
    let l = -math::ln(e_min);
    let at_min = f.intercept + f.slope * l;
    f.slope > 0.0 && f.r_squared >= LOG_FIT_R2 && f.slope * l >= 0.5 * at_min.abs()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "form", rename_all = "kebab-case"))]
pub enum LogMomentForm {
    /// N ≥ 5: fit of value/ε² = a + b·log(1/ε).
    Leading { fit: Option<LineFit>, coefficient: f64 },
    /// N = 4: `value ≥ K ε² log(1/ε)`, tested with a 5% allowance.
    LowerBound { constant: f64, bounds: Vec<f64>, worst_ratio: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogMomentReport {
    pub values: Vec<(f64, f64)>,
    pub form: LogMomentForm,
    pub confirmed: bool,
}

/// Allowance on the N = 4 lower bound.
pub const LOWER_BOUND_ALLOWANCE: f64 = 0.05;

/// The constant `C²ω₄ log(C²ρ²e^{−8/(2+α)²}/(2ρ)⁴)` multiplying ε²log(1/ε)
/// in the N = 4 lower bound.
pub fn four_dim_bound_constant(alpha: f64, rho_cut: f64) -> f64 {
    let c2 = math::powi(bubble_constant(4, alpha), 2);
    let arg = c2 * rho_cut * rho_cut * math::exp(-8.0 / ((2.0 + alpha) * (2.0 + alpha))) / math::powi(2.0 * rho_cut, 4);
    c2 * math::sphere_area(4) * math::ln(arg)
}

/// Small-ε behaviour of ∫U_ε² log U_ε².
pub fn log_moment(alpha: f64, dim: usize, rho_cut: f64, epsilons: &[f64]) -> Result<LogMomentReport> {
    if dim < 4 {
        return Err(Error::Unsupported("no expansion of the log moment is available for N = 3"));
    }
    let template = BubbleSpec::new(dim, alpha, 0.1, rho_cut)?;
    let mut values = Vec::with_capacity(epsilons.len());
    for &e in epsilons {
        values.push((e, log_moment_value(&template.with_epsilon(e)?)));
    }
    if dim == 4 {
        let constant = four_dim_bound_constant(alpha, rho_cut);
        let bounds: Vec<f64> = values.iter().map(|(e, _)| constant * e * e * -math::ln(*e)).collect();
        let mut worst_ratio = f64::INFINITY;
        let mut confirmed = true;
        for ((_, v), b) in values.iter().zip(&bounds) {
            if *v < b - LOWER_BOUND_ALLOWANCE * b.abs() {
                confirmed = false;
            }
            if *b != 0.0 {
                worst_ratio = worst_ratio.min(v / b);
            }
        }
        return Ok(LogMomentReport {
            values,
            form: LogMomentForm::LowerBound { constant, bounds, worst_ratio },
            confirmed,
        });
    }
    let tail = sorted_tail(&values);
    let x: Vec<f64> = tail.iter().map(|(e, _)| -math::ln(*e)).collect();
    let y: Vec<f64> = tail.iter().map(|(e, v)| v / (e * e)).collect();
    let fit = fit_line(&x, &y);
    let coefficient = fit.map_or(f64::NAN, |f| f.slope);
    let confirmed = fit.is_some_and(|f| f.slope > 0.0 && f.r_squared >= LOG_FIT_R2);
    Ok(LogMomentReport { values, form: LogMomentForm::Leading { fit, coefficient }, confirmed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_center_value() {
        let s = BubbleSpec::new(4, 0.0, 0.3, 0.25).unwrap();
        assert!((s.constant() - 8f64.sqrt()).abs() < 1e-14);
        let c = s.constant() * math::powf(0.3, -1.0);
        assert!((s.value(0.0) - c).abs() < 1e-13 * c);
        let at_eps = c * math::powf(2.0, -2.0 / 2.0);
        assert!((s.value(0.3) - at_eps).abs() < 1e-13 * at_eps);
    }

    #[test]
    fn cutoff_plateaus() {
        let s = BubbleSpec::new(3, 0.0, 0.1, 0.2).unwrap();
        assert_eq!(s.cutoff(0.2), 1.0);
        assert_eq!(s.cutoff(0.4), 0.0);
        for k in 0..100 {
            let r = 0.2 + 0.002 * k as f64;
            let c = s.cutoff(r);
            assert!((0.0..=1.0).contains(&c));
            assert!(s.cutoff(r + 0.002) <= c);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let s = BubbleSpec::new(5, 1.0, 0.05, 0.25).unwrap();
        for r in [0.01, 0.05, 0.3] {
            let h = 1e-6 * r;
            let fd = (s.value(r + h) - s.value(r - h)) / (2.0 * h);
            assert!((fd - s.derivative(r)).abs() < 1e-6 * fd.abs());
            let fd2 = (s.derivative(r + h) - s.derivative(r - h)) / (2.0 * h);
            assert!((fd2 - s.second_derivative(r)).abs() < 1e-5 * fd2.abs());
        }
    }

    #[test]
    fn tail_series_limits() {
        let (s, _) = tail_series(2.0, 3.0, 2.0, 0.0).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        assert!(tail_series(2.0, 3.0, 2.0, 0.9).is_err());
    }

    #[test]
    fn best_constant_requires_extent() {
        assert!(best_constant(0.0, 3, 10.0, 0.1).is_err());
    }

    #[test]
    fn log_moment_rejects_three_dimensions() {
        assert!(matches!(log_moment(0.0, 3, 0.1, &[1e-3]), Err(Error::Unsupported(_))));
    }
}
