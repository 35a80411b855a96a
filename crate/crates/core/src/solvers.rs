//! Variational solvers: H¹-preconditioned descent inside a gradient-norm
//! ball, a string-method mountain pass with a climbing stage, and damped
//! Newton polishing.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bubbles::BubbleSpec;
use crate::error::{Error, Result};
use crate::functional::{Functional, ProblemParams};
use crate::grid::{dot, RadialFunction, RadialGrid};
use crate::linalg::solve_tridiagonal;
use crate::math;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    /// Dual-norm residual required for convergence.
    pub residual: f64,
    /// Relative energy change treated as stagnation.
    pub energy_stagnation: f64,
    pub descent_cap: usize,
    pub newton_cap: usize,
    pub armijo: f64,
    pub path_nodes: usize,
    /// Descent or climbing hands over to Newton below this residual.
    pub newton_switch: f64,
    /// Newton refuses inputs whose residual exceeds this.
    pub newton_basin: f64,
    /// Newton stops once the residual is below this.
    pub newton_target: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-8,
            energy_stagnation: 1e-12,
            descent_cap: 50_000,
            newton_cap: 50,
            armijo: 1e-4,
            path_nodes: 64,
            newton_switch: 1e-5,
            newton_basin: 1.0,
            newton_target: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SolutionKind {
    #[cfg_attr(feature = "serde", serde(rename = "LOCAL_MIN"))]
    LocalMin,
    #[cfg_attr(feature = "serde", serde(rename = "MOUNTAIN_PASS"))]
    MountainPass,
    #[cfg_attr(feature = "serde", serde(rename = "REFINED"))]
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolveStatus {
    Converged,
    NotConverged,
    /// μ > 0 started at 0: the origin is the in-ball minimizer.
    TrivialMinimizer,
    /// Descent stopped on the constraint sphere.
    ConstraintActive,
    /// The path maximum collapsed to the endpoint level, or polishing left
    /// the saddle.
    SaddleLost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: RadialFunction,
    pub energy: f64,
    pub residual: f64,
    pub nehari: f64,
    pub iterations: usize,
    pub kind: SolutionKind,
    pub status: SolveStatus,
    /// ‖∇u‖.
    pub norm_grad: f64,
    pub rho_mp: Option<f64>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    fn assemble(
        f: &Functional<'_>,
        u: Vec<f64>,
        iterations: usize,
        kind: SolutionKind,
        status: SolveStatus,
        rho_mp: Option<f64>,
    ) -> Result<Self> {
        let e = f.energy(&u)?;
        let residual = f.residual(&u)?;
        let norm_grad = math::sqrt(f.dirichlet(&u));
        Ok(Self {
            solution: RadialFunction::new(f.grid(), u)?,
            energy: e.total,
            residual,
            nehari: e.nehari,
            iterations,
            kind,
            status,
            norm_grad,
            rho_mp,
        })
    }
}

fn h1_norm(f: &Functional<'_>, u: &[f64]) -> f64 {
    math::sqrt(f.dirichlet(u).max(0.0))
}

fn positive_part(u: &mut [f64]) {
    u.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Minimizes I over `{‖∇u‖ ≤ ρ − τ}`, τ = 1e-3ρ, by projected
/// H¹-gradient descent with Armijo backtracking, then polishes with Newton.
pub fn minimize_in_ball(
    params: &ProblemParams,
    grid: &RadialGrid,
    rho_mp: f64,
    start: &RadialFunction,
    tol: &Tolerances,
) -> Result<SolveResult> {
    if !(rho_mp > 0.0) {
        return Err(Error::InvalidInput("rho_mp must be positive"));
    }
    let f = Functional::new(*params, grid)?;
    let radius = rho_mp * (1.0 - 1e-3);
    let mut u = start.values().to_vec();
    grid.check_len(u.len())?;
    positive_part(&mut u);
    if u.iter().all(|&v| v == 0.0) && params.mu >= 0.0 {
        return SolveResult::assemble(&f, u, 0, SolutionKind::LocalMin, SolveStatus::TrivialMinimizer, Some(rho_mp));
    }
    let n0 = h1_norm(&f, &u);
    if n0 > radius {
        u.iter_mut().for_each(|v| *v *= radius / n0);
    }
    let mut energy = f.value(&u)?;
    let mut tau: f64 = 1.0;
    let mut iterations = 0;
    let mut quiet = 0;
    while iterations < tol.descent_cap {
        iterations += 1;
        let d = f.derivative(&u)?;
        let p = f.riesz(&d)?;
        let res = math::sqrt(dot(&d, &p).max(0.0));
        if res < tol.newton_switch {
            break;
        }
        let mut accepted = None;
        let mut step = (2.0 * tau).min(1.0);
        for _ in 0..60 {
            let mut trial: Vec<f64> = u.iter().zip(&p).map(|(a, b)| a - step * b).collect();
            let nt = h1_norm(&f, &trial);
            if nt > radius {
                trial.iter_mut().for_each(|v| *v *= radius / nt);
            }
            let moved: f64 = d.iter().zip(trial.iter().zip(&u)).map(|(g, (t, a))| g * (t - a)).sum();
            if let Ok(et) = f.value(&trial) {
                if et <= energy + tol.armijo * moved {
                    accepted = Some((trial, et));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((mut next, mut e_next)) = accepted else { break };
        tau = step;
        if iterations % 100 == 0 {
            positive_part(&mut next);
            e_next = f.value(&next)?;
        }
        let change = (energy - e_next).abs();
        u = next;
        energy = e_next;
        if change <= tol.energy_stagnation * (1.0 + energy.abs()) {
            quiet += 1;
            if quiet >= 20 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    positive_part(&mut u);
    let on_sphere = h1_norm(&f, &u) >= radius * (1.0 - 1e-9);
    let polished = if u.iter().any(|&v| v > 0.0) { newton_refine_with(&f, &u, tol).ok() } else { None };
    let (u, extra, refined_ok) = match polished {
        Some((v, its, ok))
            if h1_norm(&f, &v) < rho_mp && f.value(&v)? <= f.value(&u)? + 1e-10 * (1.0 + energy.abs()) =>
        {
            (v, its, ok)
        }
        _ => (u, 0, false),
    };
    let residual = f.residual(&u)?;
    let status = if on_sphere && !refined_ok {
        SolveStatus::ConstraintActive
    } else if residual <= tol.residual {
        SolveStatus::Converged
    } else {
        SolveStatus::NotConverged
    };
    SolveResult::assemble(&f, u, iterations + extra, SolutionKind::LocalMin, status, Some(rho_mp))
}

/// Damped Newton on the discrete Euler–Lagrange system.
pub fn newton_refine(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialFunction,
    tol: &Tolerances,
) -> Result<SolveResult> {
    let f = Functional::new(*params, grid)?;
    let (v, its, ok) = newton_refine_with(&f, u.values(), tol)?;
    let status = if ok { SolveStatus::Converged } else { SolveStatus::NotConverged };
    SolveResult::assemble(&f, v, its, SolutionKind::Refined, status, None)
}

/// Interpolates a solution from `from` onto `to` and refines it there by
/// Newton without the basin check.
pub fn refine_on_grid(
    params: &ProblemParams,
    from: &RadialGrid,
    u: &RadialFunction,
    to: &RadialGrid,
    tol: &Tolerances,
) -> Result<SolveResult> {
    from.check_len(u.len())?;
    let mut v = to.sample(|r| from.interpolate(u.values(), r));
    let n = v.len();
    v[n - 1] = 0.0;
    let start = RadialFunction::new(to, v)?;
    let tol = Tolerances { newton_basin: f64::INFINITY, ..tol.clone() };
    newton_refine(params, to, &start, &tol)
}

/// Energy level on two resolutions and its second-order extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelEstimate {
    pub fine: f64,
    pub coarse: f64,
    pub extrapolated: f64,
    pub fine_nodes: usize,
    pub coarse_nodes: usize,
}

/// Re-solves `fine` on a grid with `coarse_nodes` nodes and the same grading
/// and extrapolates the level assuming an `h²` error.
pub fn richardson_level(
    params: &ProblemParams,
    grid: &RadialGrid,
    fine: &SolveResult,
    coarse_nodes: usize,
    tol: &Tolerances,
) -> Result<LevelEstimate> {
    if !(coarse_nodes < grid.len()) {
        return Err(Error::InvalidInput("the companion grid must be coarser"));
    }
    let coarse_grid = RadialGrid::new(grid.dim(), grid.alpha(), coarse_nodes, grid.grading())?;
    let coarse = refine_on_grid(params, grid, &fine.solution, &coarse_grid, tol)?;
    if !coarse.converged() {
        return Err(Error::NotConverged {
            what: "companion solve for the level extrapolation",
            iterations: coarse.iterations,
            residual: coarse.residual,
        });
    }
    let ratio = (grid.len() - 1) as f64 / (coarse_nodes - 1) as f64;
    let extrapolated = fine.energy + (fine.energy - coarse.energy) / (ratio * ratio - 1.0);
    Ok(LevelEstimate { fine: fine.energy, coarse: coarse.energy, extrapolated, fine_nodes: grid.len(), coarse_nodes })
}

/// Returns the final iterate, the iteration count and whether the residual
/// tolerance was met.
fn newton_refine_with(f: &Functional<'_>, u0: &[f64], tol: &Tolerances) -> Result<(Vec<f64>, usize, bool)> {
    f.grid().check_len(u0.len())?;
    if u0.iter().all(|&v| v == 0.0) && f.params().mu != 0.0 {
        return Err(Error::InvalidInput("Newton refinement is undefined at u = 0 when mu != 0"));
    }
    let mut u = u0.to_vec();
    let mut res = f.residual(&u)?;
    if !(res <= tol.newton_basin) {
        return Err(Error::InvalidInput("residual outside the Newton basin"));
    }
    let n = u.len() - 1;
    let mut its = 0;
    while its < tol.newton_cap && res > tol.newton_target {
        its += 1;
        let d = f.derivative(&u)?;
        let (lo, di, up) = f.jacobian(&u)?;
        let rhs: Vec<f64> = d[..n].iter().map(|v| -v).collect();
        let Ok(delta) = solve_tridiagonal(&lo, &di, &up, &rhs) else { break };
        let mut theta = 1.0;
        let mut next = None;
        while theta >= 1.0 / 1024.0 {
            let mut trial = u.clone();
            for i in 0..n {
                trial[i] += theta * delta[i];
            }
            let positive = (0..n).all(|i| trial[i] >= 0.0 && (u[i] <= 0.0 || trial[i] > 0.0));
            if positive {
                if let Ok(rt) = f.residual(&trial) {
                    if rt <= (1.0 - 1e-4 * theta) * res {
                        next = Some((trial, rt));
                        break;
                    }
                }
            }
            theta *= 0.5;
        }
        let Some((v, r)) = next else { break };
        u = v;
        res = r;
    }
    Ok((u, its, res <= tol.residual))
}

/// Discretized path with its node energies.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub nodes: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
    pub max_index: usize,
    /// Length multiplier T of the bubble direction (1 for a plain segment).
    pub t_end: f64,
    /// Parameter of the energy maximum along the initial segment, in [0, T].
    pub t_eps: f64,
    pub epsilon: Option<f64>,
}

impl PathState {
    /// The segment `start + t (end − start)`, t ∈ [0, 1], with `count` nodes.
    pub fn segment(
        params: &ProblemParams,
        grid: &RadialGrid,
        start: &[f64],
        end: &[f64],
        count: usize,
    ) -> Result<Self> {
        let f = Functional::new(*params, grid)?;
        Self::segment_with(&f, start, end, count)
    }

    fn segment_with(f: &Functional<'_>, start: &[f64], end: &[f64], count: usize) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidInput("a path needs at least three nodes"));
        }
        f.grid().check_len(start.len())?;
        f.grid().check_len(end.len())?;
        let mut nodes = Vec::with_capacity(count);
        let mut energies = Vec::with_capacity(count);
        for k in 0..count {
            let t = k as f64 / (count - 1) as f64;
            let u: Vec<f64> = start.iter().zip(end).map(|(a, b)| a + t * (b - a)).collect();
            energies.push(f.value(&u)?);
            nodes.push(u);
        }
        let max_index = argmax(&energies);
        let t_eps = max_index as f64 / (count - 1) as f64;
        Ok(Self { nodes, energies, max_index, t_end: 1.0, t_eps, epsilon: None })
    }

    pub fn max_energy(&self) -> f64 {
        self.energies[self.max_index]
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Cutoff radius of the bubble direction used for initial paths.
pub const PATH_RHO_CUT: f64 = 0.25;

/// Segment `ū + t T U_ε`, t ∈ [0, 1], with the smallest `T` on a geometric
/// scan of `t_range` that exceeds `4ρ/S_α^{(N+α)/(2(α+2))}` and brings the
/// endpoint energy below `I(ū)`. The path maximum must reach `delta > 0`.
#[allow(clippy::too_many_arguments)]
pub fn build_initial_path(
    params: &ProblemParams,
    grid: &RadialGrid,
    u_bar: &RadialFunction,
    epsilon: f64,
    t_range: (f64, f64),
    s_alpha: f64,
    rho_mp: f64,
    delta: f64,
    count: usize,
) -> Result<PathState> {
    let f = Functional::new(*params, grid)?;
    let n = params.dim as f64;
    let a = params.alpha;
    let bump = BubbleSpec::new(params.dim, a, epsilon, PATH_RHO_CUT)?.sample(grid);
    let t_min = 4.0 * rho_mp / math::powf(s_alpha, (n + a) / (2.0 * (a + 2.0)));
    let ub = u_bar.values();
    let e_bar = f.value(ub)?;
    let mut t = t_range.0.max(t_min * (1.0 + 1e-9));
    let mut best_gap = f64::INFINITY;
    let found = loop {
        if t > t_range.1 {
            break None;
        }
        let end: Vec<f64> = ub.iter().zip(bump.values()).map(|(x, y)| x + t * y).collect();
        match f.value(&end) {
            Ok(e) if e < e_bar => break Some(end),
            Ok(e) => best_gap = best_gap.min(e - e_bar),
            Err(_) => {}
        }
        t *= 1.25;
    };
    let Some(end) = found else {
        return Err(Error::NotConverged {
            what: "endpoint search for the initial path",
            iterations: 0,
            residual: best_gap,
        });
    };
    let mut path = PathState::segment_with(&f, ub, &end, count)?;
    path.t_end = t;
    path.t_eps *= t;
    path.epsilon = Some(epsilon);
    if !(path.max_energy() >= delta && delta > 0.0) {
        return Err(Error::InvalidInput("path maximum below the required margin; decrease epsilon"));
    }
    Ok(path)
}

/// Tries ε = 0.2·2^{−k} until [`build_initial_path`] succeeds, keeping ε at
/// least eight local mesh widths.
#[allow(clippy::too_many_arguments)]
pub fn find_initial_path(
    params: &ProblemParams,
    grid: &RadialGrid,
    u_bar: &RadialFunction,
    s_alpha: f64,
    rho_mp: f64,
    delta: f64,
    count: usize,
) -> Result<PathState> {
    let x = grid.nodes();
    let mut eps = 0.2;
    let mut last = Error::InvalidInput("no admissible epsilon");
    while eps > 0.0 {
        let j = x.partition_point(|&r| r < eps).min(x.len() - 1);
        let h = x[j] - x[j.saturating_sub(1)];
        if eps < 8.0 * h {
            break;
        }
        match build_initial_path(params, grid, u_bar, eps, (1.0, 1e6), s_alpha, rho_mp, delta, count) {
            Ok(p) => return Ok(p),
            Err(e) => last = e,
        }
        eps *= 0.5;
    }
    Err(last)
}

/// Segment from 0 to `T U_ε` for problems whose mountain pass starts at the
/// origin. ε runs over `0.2·2^{−k/4}` down to eight local mesh widths and the
/// one with the lowest fiber maximum `max_t I(tU_ε)` is kept; `T` is the
/// first scan point past the maximum with `I(TU_ε) < 0`.
pub fn bubble_path(params: &ProblemParams, grid: &RadialGrid, count: usize) -> Result<PathState> {
    let f = Functional::new(*params, grid)?;
    let x = grid.nodes();
    let mut best: Option<(f64, f64, f64, RadialFunction)> = None;
    let mut k = 0;
    loop {
        let eps = 0.2 * math::powf(2.0, -(k as f64) / 4.0);
        k += 1;
        let j = x.partition_point(|&r| r < eps).min(x.len() - 1);
        if eps < 8.0 * (x[j] - x[j.saturating_sub(1)]) {
            break;
        }
        let bump = BubbleSpec::new(params.dim, params.alpha, eps, PATH_RHO_CUT)?.sample(grid);
        let it = f.integrals(bump.values())?;
        let (mut t, mut peak, mut end) = (1e-3, f64::NEG_INFINITY, None);
        while t < 1e8 {
            let e = f.fiber_value(&it, t);
            peak = peak.max(e);
            if e < 0.0 && peak > 0.0 {
                end = Some(t);
                break;
            }
            t *= 1.01;
        }
        if let Some(t_end) = end {
            if best.as_ref().is_none_or(|b| peak < b.0) {
                best = Some((peak, eps, t_end, bump));
            }
        }
    }
    let Some((_, eps, t_end, bump)) = best else {
        return Err(Error::NotConverged { what: "bubble path search", iterations: k, residual: f64::NAN });
    };
    let start = alloc::vec![0.0; grid.len()];
    let end: Vec<f64> = bump.values().iter().map(|v| t_end * v).collect();
    let mut path = PathState::segment_with(&f, &start, &end, count)?;
    path.t_end = t_end;
    path.t_eps *= t_end;
    path.epsilon = Some(eps);
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MountainPassReport {
    pub result: SolveResult,
    /// Path maximum before and after the descent stage of every sweep.
    pub level_history: Vec<(f64, f64)>,
    pub sweeps: usize,
    /// Iterations of the refinement stage after the string sweeps.
    pub refinement_iterations: usize,
    pub final_path_max: f64,
}

/// Largest H¹ move of a path node per sweep, as a fraction of the distance
/// to its nearer neighbour.
const STEP_FRACTION: f64 = 0.5;

/// String-method mountain pass. Each sweep moves every non-anchored node
/// whose energy exceeds the higher anchor by one Armijo-controlled H¹-descent
/// step (capped by the local node spacing), then redistributes the nodes
/// uniformly in H¹ arclength. Once the gradient at the maximizer is nearly
/// tangent to the path, the maximizer is refined by minimizing the fiber
/// maximum `J(u) = max_t I(tu)` (a climbing iteration when the fiber has no
/// interior maximum) and polished by Newton.
pub fn mountain_pass(
    params: &ProblemParams,
    grid: &RadialGrid,
    path: PathState,
    tol: &Tolerances,
) -> Result<MountainPassReport> {
    let f = Functional::new(*params, grid)?;
    let PathState { mut nodes, mut energies, .. } = path;
    let m = nodes.len();
    if m < 3 {
        return Err(Error::InvalidInput("a path needs at least three nodes"));
    }
    let floor = energies[0].max(energies[m - 1]);
    let mut steps = alloc::vec![1.0f64; m];
    let mut history = Vec::new();
    let mut imax = argmax(&energies);
    let mut sweeps = 0;
    let scale = 1.0 + floor.abs() + energies[imax].abs();
    let mut best = energies[imax];
    let mut since_progress = 0;
    while sweeps < tol.descent_cap {
        sweeps += 1;
        let before = energies[argmax(&energies)];
        let spacing = node_spacing(&f, &nodes);
        for k in 1..m - 1 {
            if energies[k] <= floor {
                continue;
            }
            let d = f.derivative(&nodes[k])?;
            let p = f.riesz(&d)?;
            let g2 = dot(&d, &p);
            if !(g2 > 0.0) {
                continue;
            }
            let cap = STEP_FRACTION * spacing[k] / math::sqrt(g2);
            let mut tau = (2.0 * steps[k]).min(1.0).min(cap);
            for _ in 0..40 {
                let mut trial: Vec<f64> = nodes[k].iter().zip(&p).map(|(a, b)| a - tau * b).collect();
                if sweeps % 100 == 0 {
                    positive_part(&mut trial);
                }
                if let Ok(e) = f.value(&trial) {
                    if e <= energies[k] - tol.armijo * tau * g2 {
                        nodes[k] = trial;
                        energies[k] = e;
                        steps[k] = tau;
                        break;
                    }
                }
                tau *= 0.5;
            }
        }
        let after = energies[argmax(&energies)];
        history.push((before, after));
        if let Some((nn, ne)) = reparametrize(&f, &nodes)? {
            nodes = nn;
            energies = ne;
        }
        imax = argmax(&energies);
        let level = energies[imax];
        if level - floor <= 1e-10 * scale || imax == 0 || imax == m - 1 {
            let u = nodes[imax].clone();
            let result =
                SolveResult::assemble(&f, u, sweeps, SolutionKind::MountainPass, SolveStatus::SaddleLost, None)?;
            return Ok(MountainPassReport {
                result,
                level_history: history,
                sweeps,
                refinement_iterations: 0,
                final_path_max: level,
            });
        }
        if normal_residual(&f, &nodes, imax)? < 1e-2 * math::sqrt(scale) {
            break;
        }
        if best - level > 1e-10 * scale {
            best = level;
            since_progress = 0;
        } else {
            since_progress += 1;
            if since_progress >= 200 {
                break;
            }
        }
    }
    let final_path_max = energies[imax];
    let tangent: Vec<f64> = nodes[imax + 1].iter().zip(&nodes[imax - 1]).map(|(a, b)| a - b).collect();
    let (u, refined) = match fiber_descent(&f, &nodes[imax], tol)? {
        Some(r) => r,
        None => climb(&f, nodes[imax].clone(), tangent, tol)?,
    };
    let polished = newton_refine_with(&f, &u, tol).ok();
    let (u, ok) = match polished {
        Some((v, _, ok)) => (v, ok),
        None => (u, false),
    };
    let e = f.value(&u)?;
    let dist_scale = h1_norm(&f, &u).max(1e-300);
    let near_anchor = [&nodes[0], &nodes[m - 1]].iter().any(|a| {
        let diff: Vec<f64> = u.iter().zip(a.iter()).map(|(x, y)| x - y).collect();
        h1_norm(&f, &diff) < 1e-3 * dist_scale
    });
    let status = if near_anchor || e <= floor {
        SolveStatus::SaddleLost
    } else if ok {
        SolveStatus::Converged
    } else {
        SolveStatus::NotConverged
    };
    let result = SolveResult::assemble(&f, u, sweeps + refined, SolutionKind::MountainPass, status, None)?;
    Ok(MountainPassReport { result, level_history: history, sweeps, refinement_iterations: refined, final_path_max })
}

fn node_spacing(f: &Functional<'_>, nodes: &[Vec<f64>]) -> Vec<f64> {
    let m = nodes.len();
    let gaps: Vec<f64> = (1..m).map(|k| distance(f, &nodes[k], &nodes[k - 1])).collect();
    (0..m)
        .map(|k| {
            let left = if k > 0 { gaps[k - 1] } else { f64::INFINITY };
            let right = if k + 1 < m { gaps[k] } else { f64::INFINITY };
            left.min(right)
        })
        .collect()
}

fn distance(f: &Functional<'_>, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    h1_norm(f, &diff)
}

/// H¹ norm of the gradient at node `k` after removing its component along
/// the path tangent.
fn normal_residual(f: &Functional<'_>, nodes: &[Vec<f64>], k: usize) -> Result<f64> {
    let d = f.derivative(&nodes[k])?;
    let p = f.riesz(&d)?;
    let t: Vec<f64> = nodes[k + 1].iter().zip(&nodes[k - 1]).map(|(a, b)| a - b).collect();
    let tn = h1_norm(f, &t);
    let g2 = dot(&d, &p);
    if !(tn > 0.0) {
        return Ok(math::sqrt(g2.max(0.0)));
    }
    let c = dot(&d, &t) / tn;
    Ok(math::sqrt((g2 - c * c).max(0.0)))
}

/// Redistributes nodes uniformly in H¹ arclength along the polygon.
#[allow(clippy::type_complexity)]
fn reparametrize(f: &Functional<'_>, nodes: &[Vec<f64>]) -> Result<Option<(Vec<Vec<f64>>, Vec<f64>)>> {
    let m = nodes.len();
    let mut cum = alloc::vec![0.0; m];
    for k in 1..m {
        cum[k] = cum[k - 1] + distance(f, &nodes[k], &nodes[k - 1]);
    }
    let total = cum[m - 1];
    if !(total > 0.0) {
        return Ok(None);
    }
    let mut out = Vec::with_capacity(m);
    let mut energies = Vec::with_capacity(m);
    let mut seg = 0;
    for i in 0..m {
        let node = if i == 0 {
            nodes[0].clone()
        } else if i == m - 1 {
            nodes[m - 1].clone()
        } else {
            let s = total * i as f64 / (m - 1) as f64;
            while seg + 1 < m - 1 && cum[seg + 1] < s {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let t = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
            nodes[seg].iter().zip(&nodes[seg + 1]).map(|(a, b)| a + t * (b - a)).collect()
        };
        energies.push(f.value(&node)?);
        out.push(node);
    }
    Ok(Some((out, energies)))
}

/// Stored pairs of the limited-memory BFGS update.
const LBFGS_MEMORY: usize = 20;

/// `J(u) = I(t(u)u)` with `t(u)` the outer fiber maximum, and `t(u)`.
fn fiber_max(f: &Functional<'_>, u: &[f64]) -> Option<(f64, f64)> {
    let it = f.integrals(u).ok()?;
    let t = f.fiber_peak(&it)?;
    Some((f.fiber_value(&it, t), t))
}

/// Limited-memory BFGS in the H¹ metric on `J`, over the positive cone with
/// iterates normalized to `‖∇u‖ = 1` (J is scale invariant). The gradient is
/// `t I'(tu)`. Returns `t u` at the last iterate, or `None` when the start
/// has no fiber maximum.
fn fiber_descent(f: &Functional<'_>, start: &[f64], tol: &Tolerances) -> Result<Option<(Vec<f64>, usize)>> {
    let normalize = |u: &mut Vec<f64>| {
        let n = h1_norm(f, u);
        if n > 0.0 {
            u.iter_mut().for_each(|v| *v /= n);
        }
    };
    let scaled = |u: &[f64], t: f64| -> Vec<f64> { u.iter().map(|v| v * t).collect() };
    let mut u = start.to_vec();
    positive_part(&mut u);
    normalize(&mut u);
    let Some((mut j, mut t)) = fiber_max(f, &u) else { return Ok(None) };
    let gradient = |u: &[f64], t: f64| -> Result<Vec<f64>> {
        Ok(f.derivative(&scaled(u, t))?.into_iter().map(|v| v * t).collect())
    };
    let mut g = gradient(&u, t)?;
    let mut pairs: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut its = 0;
    while its < tol.descent_cap {
        if f.residual(&scaled(&u, t))? <= tol.newton_switch {
            break;
        }
        its += 1;
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let mut dir = f.riesz(&q)?;
        if let Some((s, y, _)) = pairs.last() {
            let gamma = dot(s, y) / dot(y, &f.riesz(y)?);
            dir.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&dir, &g);
        if !(slope > 0.0) {
            pairs.clear();
            dir = f.riesz(&g)?;
            slope = dot(&dir, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let mut trial: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| (a - step * b).max(0.0)).collect();
            normalize(&mut trial);
            if let Some((jt, tt)) = fiber_max(f, &trial) {
                if jt <= j - tol.armijo * step * slope {
                    accepted = Some((trial, jt, tt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next, jn, tn)) = accepted else { break };
        let gn = gradient(&next, tn)?;
        let s: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 0.0 {
            pairs.push((s, y, 1.0 / sy));
            if pairs.len() > LBFGS_MEMORY {
                pairs.remove(0);
            }
        }
        u = next;
        j = jn;
        t = tn;
        g = gn;
    }
    Ok(Some((scaled(&u, t), its)))
}

/// Climbing iteration: descent orthogonal to the tangent, ascent along it,
/// accepted while the residual decreases.
fn climb(f: &Functional<'_>, mut u: Vec<f64>, tangent: Vec<f64>, tol: &Tolerances) -> Result<(Vec<f64>, usize)> {
    let tn = h1_norm(f, &tangent);
    if !(tn > 0.0) {
        return Ok((u, 0));
    }
    let t: Vec<f64> = tangent.iter().map(|v| v / tn).collect();
    let mut res = f.residual(&u)?;
    let mut step: f64 = 0.5;
    let mut its = 0;
    while its < 5_000 && res > tol.newton_switch {
        its += 1;
        let d = f.derivative(&u)?;
        let p = f.riesz(&d)?;
        let c = dot(&d, &t);
        let dir: Vec<f64> = p.iter().zip(&t).map(|(a, b)| -(a - 2.0 * c * b)).collect();
        let mut accepted = false;
        let mut s = (2.0 * step).min(1.0);
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
            if let Ok(rt) = f.residual(&trial) {
                if rt < res {
                    u = trial;
                    res = rt;
                    step = s;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((u, its))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum VerdictStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdict {
    pub check: String,
    pub status: VerdictStatus,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
}

impl Verdict {
    fn compare(check: &str, lhs: Option<f64>, rhs: Option<f64>, holds: impl Fn(f64, f64) -> bool) -> Self {
        let status = match (lhs, rhs) {
            (Some(a), Some(b)) if holds(a, b) => VerdictStatus::Pass,
            (Some(_), Some(_)) => VerdictStatus::Fail,
            _ => VerdictStatus::Skipped,
        };
        Self { check: String::from(check), status, lhs, rhs }
    }
}

/// Inputs to [`level_report`] beyond the solver results.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Thresholds {
    pub e_th: Option<f64>,
    pub sigma: Option<f64>,
    /// Estimate of the least energy over the critical points found.
    pub c_kappa: Option<f64>,
    /// Relative tolerance for C̃_ρ = C̃_κ.
    pub match_tolerance: f64,
}

/// Least energy over the converged results: the estimate of C̃_κ.
pub fn c_kappa_estimate(results: &[&SolveResult]) -> Option<f64> {
    results.iter().filter(|r| r.converged()).map(|r| r.energy).reduce(f64::min)
}

/// Checks the level inequalities at the given parameters.
pub fn level_report(
    params: &ProblemParams,
    local_min: Option<&SolveResult>,
    mountain: Option<&SolveResult>,
    th: &Thresholds,
) -> Vec<Verdict> {
    let c_m = mountain.filter(|r| r.converged()).map(|r| r.energy);
    let c_rho = local_min.filter(|r| r.converged()).map(|r| r.energy);
    let mut out = Vec::new();
    if params.mu > 0.0 {
        let floor = th.c_kappa.map_or(0.0, |k| k.min(0.0));
        out.push(Verdict::compare("c_M < min{0, C_kappa} + E_th", c_m, th.e_th.map(|e| floor + e), |a, b| a < b));
        out.push(Verdict::compare("0 < c_M", Some(0.0), c_m, |a, b| a < b));
    } else {
        let tol = if th.match_tolerance > 0.0 { th.match_tolerance } else { 1e-6 };
        let diff = match (c_rho, th.c_kappa) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        out.push(Verdict::compare("|C_rho - C_kappa| < tol |C_rho|", diff, c_rho.map(|c| tol * c.abs()), |a, b| a < b));
        out.push(Verdict::compare("I(u_bar) < 0", c_rho, Some(0.0), |a, b| a < b));
        out.push(Verdict::compare("0 < sigma", Some(0.0), th.sigma, |a, b| a < b));
        out.push(Verdict::compare("sigma <= c_M", th.sigma, c_m, |a, b| a <= b));
        let bound = match (th.c_kappa, th.e_th) {
            (Some(k), Some(e)) => Some(k + e),
            _ => None,
        };
        out.push(Verdict::compare("c_M < C_kappa + E_th", c_m, bound, |a, b| a < b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::first_eigenpair;
    use crate::grid::Grading;

    #[test]
    fn trivial_minimizer_for_positive_mu() {
        let g = RadialGrid::new(3, 0.0, 64, Grading::Uniform).unwrap();
        let p = ProblemParams::new(3, 0.0, 0.0, 1.0).unwrap();
        let r = minimize_in_ball(&p, &g, 1.0, &RadialFunction::zeros(&g), &Tolerances::default()).unwrap();
        assert_eq!(r.status, SolveStatus::TrivialMinimizer);
        assert_eq!(r.energy, 0.0);
        assert!(minimize_in_ball(&p, &g, 0.0, &RadialFunction::zeros(&g), &Tolerances::default()).is_err());
    }

    #[test]
    fn newton_rejects_zero_with_log_term() {
        let g = RadialGrid::new(3, 0.0, 64, Grading::Uniform).unwrap();
        let p = ProblemParams::new(3, 0.0, 0.0, -1.0).unwrap();
        assert!(newton_refine(&p, &g, &RadialFunction::zeros(&g), &Tolerances::default()).is_err());
    }

    #[test]
    fn local_minimizer_for_negative_mu() {
        let g = RadialGrid::new(3, 0.0, 256, Grading::Uniform).unwrap();
        let p = ProblemParams::new(3, 0.0, -20.0, -10.0).unwrap();
        let phi = first_eigenpair(&g).unwrap().phi1;
        let start = RadialFunction::from_fn(&g, |r| 0.05 * g.interpolate(phi.values(), r));
        let r = minimize_in_ball(&p, &g, 3.0, &start, &Tolerances::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Converged, "{r:?}");
        assert!(r.energy < 0.0);
        assert!(r.residual < 1e-8);
        assert!(r.norm_grad < 3.0);
    }
}
