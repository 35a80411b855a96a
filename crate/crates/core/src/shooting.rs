//! Radial shooting for
//!
//! ```text
//! u'' + (N−1)u'/r + r^α |u|^{p−2}u + λu + μu log u² = 0,  u(0) = d, u'(0) = 0,
//! ```
//!
//! integrated by the Dormand–Prince 5(4) pair from a series start and
//! stopped at the first zero. The integrals entering the energy are carried
//! along as extra components, so every shot also yields `I(u)` on `[0, r_end]`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functional::{EnergyBreakdown, Integrals, ProblemParams};
use crate::grid::{RadialFunction, RadialGrid};
use crate::math;
use crate::regions;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShootOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound for the series start radius.
    pub start_radius: f64,
    pub max_steps: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, start_radius: 1e-5, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub steps: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub start_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfilePoint {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub center: f64,
    /// `u(1)`, or 0 when the trajectory vanished earlier.
    pub terminal: f64,
    pub first_zero: Option<f64>,
    /// `u > 0` on the whole integration range `(0, 1)`.
    pub positive: bool,
    pub diagnostics: Diagnostics,
    /// Accepted steps, starting at the origin.
    pub profile: Vec<ProfilePoint>,
    /// Integrals over `[0, r_end]` (with the ω_N factor).
    pub integrals: Integrals,
}

impl ShootingResult {
    /// Signed boundary mismatch: `u(1)` for positive trajectories and
    /// `−(1 − r₀)` when the first zero `r₀` lies inside the ball. Continuous in
    /// `d` through trajectories whose zero reaches the boundary.
    pub fn mismatch(&self) -> f64 {
        match self.first_zero {
            Some(z) if z < 1.0 => -(1.0 - z),
            _ => self.terminal,
        }
    }

    /// Cubic Hermite interpolation of the profile; 0 beyond the end.
    pub fn eval(&self, r: f64) -> f64 {
        let pts = &self.profile;
        let last = pts[pts.len() - 1];
        if r >= last.r {
            return if r == last.r { last.u } else { 0.0 };
        }
        if r <= pts[0].r {
            return pts[0].u;
        }
        let k = pts.partition_point(|p| p.r <= r) - 1;
        let (a, b) = (pts[k], pts[k + 1]);
        hermite(a.r, a.u, a.du, b.r, b.u, b.du, r)
    }

    /// Samples the profile on a grid, with the boundary value forced to 0.
    pub fn on_grid(&self, grid: &RadialGrid) -> Result<RadialFunction> {
        let mut v = grid.sample(|r| self.eval(r));
        let n = v.len();
        v[n - 1] = 0.0;
        RadialFunction::new(grid, v)
    }

    pub fn energy(&self, params: &ProblemParams) -> EnergyBreakdown {
        self.integrals.breakdown(params)
    }
}

fn hermite(r0: f64, u0: f64, d0: f64, r1: f64, u1: f64, d1: f64, r: f64) -> f64 {
    let h = r1 - r0;
    let s = (r - r0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * u0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * u1 + (s3 - s2) * h * d1
}

const COMPONENTS: usize = 6;
type State = [f64; COMPONENTS];

struct Rhs {
    dim: f64,
    alpha: f64,
    lambda: f64,
    mu: f64,
    p: f64,
    floor: f64,
}

impl Rhs {
    fn new(params: &ProblemParams) -> Self {
        Self {
            dim: params.dim as f64,
            alpha: params.alpha,
            lambda: params.lambda,
            mu: params.mu,
            p: params.critical_exponent(),
            floor: params.log_floor,
        }
    }

    fn eval(&self, r: f64, y: &State) -> State {
        let (u, v) = (y[0], y[1]);
        let a = u.abs();
        let rn = math::powf(r, self.dim - 1.0);
        let ra = math::powf(r, self.alpha);
        let ap = if a > 0.0 { math::powf(a, self.p - 2.0) } else { 0.0 };
        let lg = if a >= self.floor { 2.0 * math::ln(a) } else { 0.0 };
        let dv = -(self.dim - 1.0) * v / r - ra * ap * u - self.lambda * u - self.mu * u * lg;
        [v, dv, rn * v * v, rn * ra * ap * a * a, rn * u * u, rn * u * u * lg]
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// One Dormand–Prince step from `(r, y)` with first stage `k0`. Returns the
/// new state, its derivative (FSAL) and the scaled error norm.
fn dp_step(f: &Rhs, r: f64, y: &State, k0: &State, h: f64, opts: &ShootOptions) -> (State, State, f64) {
    let mut k = [[0.0; COMPONENTS]; 7];
    k[0] = *k0;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for c in 0..COMPONENTS {
                    ys[c] += h * a * kj[c];
                }
            }
        }
        if s == 6 {
            k[6] = f.eval(r + h, &ys);
            let mut err: f64 = 0.0;
            for c in 0..COMPONENTS {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[c];
                }
                let scale = opts.atol + opts.rtol * y[c].abs().max(ys[c].abs());
                err = err.max((h * e).abs() / scale);
            }
            return (ys, k[6], err);
        }
        k[s] = f.eval(r + C[s] * h, &ys);
    }
    unreachable!()
}

/// Series start radius: small against the concentration length of the
/// critical term and against the local wavelength of the linear terms.
fn start_radius(params: &ProblemParams, d: f64, cap: f64) -> f64 {
    let p = params.critical_exponent();
    let conc = math::powf(d, -(p - 2.0) / (2.0 + params.alpha));
    let lin = (params.lambda + params.mu * 2.0 * math::ln(d)).abs();
    let mut r0 = cap.min(1e-3 * conc);
    if lin > 0.0 {
        r0 = r0.min(1e-3 / math::sqrt(lin));
    }
    r0
}

pub fn shoot(params: &ProblemParams, d: f64) -> Result<ShootingResult> {
    shoot_with(params, d, &ShootOptions::default())
}

pub fn shoot_with(params: &ProblemParams, d: f64, opts: &ShootOptions) -> Result<ShootingResult> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidInput("center value must be positive and finite"));
    }
    let n = params.dim as f64;
    let alpha = params.alpha;
    let p = params.critical_exponent();
    let omega = params.sphere_area();
    let f = Rhs::new(params);

    let r0 = start_radius(params, d, opts.start_radius);
    let lin = params.lambda * d + params.mu * d * 2.0 * math::ln(d);
    let crit = math::powf(d, p - 1.0);
    let u0 = d - lin * r0 * r0 / (2.0 * n) - crit * math::powf(r0, 2.0 + alpha) / ((2.0 + alpha) * (n + alpha));
    let v0 = -lin * r0 / n - crit * math::powf(r0, 1.0 + alpha) / (n + alpha);
    let rn = math::powf(r0, n);
    let lg = 2.0 * math::ln(d);
    let mut y: State =
        [u0, v0, 0.0, math::powf(d, p) * math::powf(r0, n + alpha) / (n + alpha), d * d * rn / n, d * d * lg * rn / n];

    let mut profile = Vec::new();
    profile.push(ProfilePoint { r: 0.0, u: d, du: 0.0 });
    profile.push(ProfilePoint { r: r0, u: y[0], du: y[1] });

    let mut r = r0;
    let mut k0 = f.eval(r, &y);
    let mut h = r0;
    let mut diag = Diagnostics { steps: 0, rejected: 0, min_step: f64::INFINITY, start_radius: r0 };
    let mut first_zero = None;

    while r < 1.0 {
        if diag.steps + diag.rejected >= opts.max_steps {
            return Err(Error::NotConverged { what: "shooting integrator", iterations: opts.max_steps, residual: r });
        }
        let last = h >= 1.0 - r;
        if last {
            h = 1.0 - r;
        }
        let (yn, kn, err) = dp_step(&f, r, &y, &k0, h, opts);
        let finite = yn.iter().all(|v| v.is_finite());
        if !finite || err > 1.0 {
            diag.rejected += 1;
            h *= if finite { (0.9 * math::powf(err, -0.2)).clamp(0.1, 0.9) } else { 0.25 };
            if h < 1e-14 * r.max(1e-300) {
                return Err(Error::StepUnderflow { radius: r });
            }
            continue;
        }
        diag.steps += 1;
        diag.min_step = diag.min_step.min(h);
        let rn = if last { 1.0 } else { r + h };
        if yn[0] <= 0.0 {
            let z = hermite_zero(r, y[0], y[1], rn, yn[0], yn[1]);
            let dz = hermite_slope(r, y[0], y[1], rn, yn[0], yn[1], z);
            let frac = (z - r) / (rn - r);
            let mut yz = y;
            for c in 2..COMPONENTS {
                yz[c] = y[c] + frac * (yn[c] - y[c]);
            }
            y = yz;
            y[0] = 0.0;
            profile.push(ProfilePoint { r: z, u: 0.0, du: dz });
            first_zero = Some(z);
            break;
        }
        profile.push(ProfilePoint { r: rn, u: yn[0], du: yn[1] });
        y = yn;
        k0 = kn;
        r = rn;
        if !last {
            let grow = if err > 0.0 { 0.9 * math::powf(err, -0.2) } else { 5.0 };
            h *= grow.clamp(0.2, 5.0);
        }
    }

    let integrals =
        Integrals { dirichlet: omega * y[2], critical: omega * y[3], mass: omega * y[4], log_mass: omega * y[5] };
    let terminal = if first_zero.is_some() { 0.0 } else { y[0] };
    let positive = match first_zero {
        None => true,
        Some(z) => z >= 1.0,
    };
    Ok(ShootingResult { center: d, terminal, first_zero, positive, diagnostics: diag, profile, integrals })
}

fn hermite_zero(r0: f64, u0: f64, d0: f64, r1: f64, u1: f64, d1: f64) -> f64 {
    let (mut lo, mut hi) = (r0, r1);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hermite(r0, u0, d0, r1, u1, d1, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn hermite_slope(r0: f64, u0: f64, d0: f64, r1: f64, u1: f64, d1: f64, r: f64) -> f64 {
    let h = r1 - r0;
    let s = (r - r0) / h;
    let s2 = s * s;
    (6.0 * s2 - 6.0 * s) * u0 / h
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (-6.0 * s2 + 6.0 * s) * u1 / h
        + (3.0 * s2 - 2.0 * s) * d1
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanOptions {
    pub per_decade: usize,
    /// Relative width in `d` at which bisection stops.
    pub bisection_tol: f64,
    /// Largest accepted boundary mismatch at a root, relative to `max(1, d)`.
    pub root_tol: f64,
    pub shoot: ShootOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { per_decade: 8, bisection_tol: 1e-12, root_tol: 1e-6, shoot: ShootOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub center: f64,
    pub shot: ShootingResult,
}

/// All positive solutions detected by a log-grid scan of the boundary
/// mismatch over `d_range`, each refined by bisection in `log d`.
pub fn find_positive_solution(params: &ProblemParams, d_range: (f64, f64), opts: &ScanOptions) -> Result<Vec<Root>> {
    let (lo, hi) = d_range;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::InvalidInput("d_range must satisfy 0 < d_lo < d_hi"));
    }
    if opts.per_decade == 0 || !(opts.bisection_tol > 0.0) {
        return Err(Error::InvalidInput("scan needs a positive density and tolerance"));
    }
    let (llo, lhi) = (math::ln(lo), math::ln(hi));
    let decades = (lhi - llo) / core::f64::consts::LN_10;
    let count = (libm::ceil(decades * opts.per_decade as f64) as usize).max(1);
    let mut scan: Vec<(f64, Option<f64>)> = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let d = math::exp(llo + (lhi - llo) * i as f64 / count as f64);
        let m = shoot_with(params, d, &opts.shoot).ok().map(|s| s.mismatch());
        scan.push((d, m));
    }
    let mut roots = Vec::new();
    for w in scan.windows(2) {
        let ((da, ma), (db, mb)) = (w[0], w[1]);
        let (Some(ma), Some(mb)) = (ma, mb) else { continue };
        if (ma > 0.0) == (mb > 0.0) {
            continue;
        }
        if let Some(root) = bisect(params, (da, ma), (db, mb), opts)? {
            roots.push(root);
        }
    }
    Ok(roots)
}

fn bisect(params: &ProblemParams, a: (f64, f64), b: (f64, f64), opts: &ScanOptions) -> Result<Option<Root>> {
    let (mut la, mut ma) = (math::ln(a.0), a.1);
    let (mut lb, mut mb) = (math::ln(b.0), b.1);
    for _ in 0..200 {
        if (lb - la).abs() <= opts.bisection_tol {
            break;
        }
        let lm = 0.5 * (la + lb);
        let Ok(s) = shoot_with(params, math::exp(lm), &opts.shoot) else {
            return Ok(None);
        };
        let mm = s.mismatch();
        if (mm > 0.0) == (ma > 0.0) {
            la = lm;
            ma = mm;
        } else {
            lb = lm;
            mb = mm;
        }
    }
    let lp = if ma > 0.0 { la } else { lb };
    let d = math::exp(lp);
    let tol = opts.root_tol * d.max(1.0);
    if ma.abs() > tol || mb.abs() > tol {
        return Ok(None);
    }
    let shot = shoot_with(params, d, &opts.shoot)?;
    if !shot.positive {
        return Ok(None);
    }
    Ok(Some(Root { center: d, shot }))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepPoint {
    pub lambda: f64,
    pub mu: f64,
    pub margin: f64,
    pub roots: Vec<f64>,
}

impl SweepPoint {
    pub fn found(&self) -> bool {
        !self.roots.is_empty()
    }
    /// A positive solution where the closed-form criterion rules them out.
    pub fn violation(&self) -> bool {
        self.margin >= 0.0 && self.found()
    }
}

/// One raster point of the nonexistence sweep.
pub fn sweep_point(
    dim: usize,
    alpha: f64,
    lambda: f64,
    mu: f64,
    lambda1: f64,
    d_range: (f64, f64),
    opts: &ScanOptions,
) -> Result<SweepPoint> {
    let params = ProblemParams::new(dim, alpha, lambda, mu)?;
    let margin = regions::nonexistence_margin(&params, lambda1)?;
    let roots = find_positive_solution(&params, d_range, opts)?.into_iter().map(|r| r.center).collect();
    Ok(SweepPoint { lambda, mu, margin, roots })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub violations: usize,
}

impl SweepReport {
    pub fn from_points(points: Vec<SweepPoint>) -> Self {
        let violations = points.iter().filter(|p| p.violation()).count();
        Self { points, violations }
    }
}

/// Serial sweep over `(λ, μ)` pairs.
pub fn nonexistence_sweep(
    dim: usize,
    alpha: f64,
    grid: &[(f64, f64)],
    lambda1: f64,
    d_range: (f64, f64),
    opts: &ScanOptions,
) -> Result<SweepReport> {
    if !(alpha > -2.0 && alpha <= 0.0) {
        return Err(Error::OutsideRegion("nonexistence sweep needs alpha in (-2, 0]"));
    }
    if grid.iter().any(|&(_, mu)| !(mu < 0.0)) {
        return Err(Error::OutsideRegion("nonexistence sweep needs mu < 0"));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &(lambda, mu) in grid {
        points.push(sweep_point(dim, alpha, lambda, mu, lambda1, d_range, opts)?);
    }
    Ok(SweepReport::from_points(points))
}
