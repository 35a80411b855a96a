//! The existence pipeline shared by `solve-min`, `solve-mp` and `report`.

use henon_core::bubbles::sobolev_constant;
use henon_core::eigen::first_eigenpair;
use henon_core::functional::{fiber_profile, FiberProfile};
use henon_core::regions::{self, Classification, MpGeometry};
use henon_core::solvers::{
    find_initial_path, minimize_in_ball, mountain_pass, richardson_level, LevelEstimate, MountainPassReport, PathState,
    SolveResult, Tolerances,
};
use henon_core::{Functional, ProblemParams, RadialFunction, RadialGrid};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::{num, Table};
use crate::Failure;

/// Path maximum margin over the endpoints, relative to E_th.
pub const PATH_MARGIN: f64 = 1e-10;
/// Fiber sample count on `t ∈ [1e-2, 1e2]`.
pub const FIBER_SAMPLES: usize = 4001;
/// Fewest nodes for which the level is extrapolated from a half-size grid.
pub const RICHARDSON_MIN_NODES: usize = 256;

pub struct Setup {
    pub params: ProblemParams,
    pub grid: RadialGrid,
    pub lambda1: f64,
    pub phi1: RadialFunction,
    pub s_alpha: f64,
    pub e_th: f64,
    pub classification: Classification,
    pub tol: Tolerances,
}

pub fn setup(cfg: &ExperimentConfig) -> Result<Setup, Failure> {
    let params = ProblemParams::new(cfg.dim, cfg.alpha, cfg.lambda, cfg.mu)?;
    let grid = RadialGrid::new(cfg.dim, cfg.alpha, cfg.nodes, cfg.grading)?;
    let eig = first_eigenpair(&grid)?;
    let s_alpha = sobolev_constant(cfg.alpha, cfg.dim)?;
    let e_th = regions::threshold_energy(cfg.alpha, cfg.dim, s_alpha);
    let classification = regions::classify(&params, eig.lambda1, s_alpha);
    let tol = Tolerances { residual: cfg.tol, path_nodes: cfg.path_nodes, ..Tolerances::default() };
    Ok(Setup { params, grid, lambda1: eig.lambda1, phi1: eig.phi1, s_alpha, e_th, classification, tol })
}

pub struct LocalMin {
    pub result: SolveResult,
    pub geometry: Option<MpGeometry>,
    pub rho: f64,
    pub fiber: Option<FiberProfile>,
}

pub fn fiber_samples() -> Vec<f64> {
    (0..FIBER_SAMPLES).map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / (FIBER_SAMPLES - 1) as f64)).collect()
}

/// Minimizer of I in the ball of radius `--rho` (default ρ_mp), started at
/// `φ₁ e^{(λ−λ₁)/(2|μ|)} / max φ₁`, the scale where `t ↦ I(tφ₁)` bottoms out
/// when the critical term is negligible.
pub fn local_minimum(s: &Setup, cfg: &ExperimentConfig) -> Result<LocalMin, Failure> {
    let geometry = regions::mp_geometry_constants(&s.params, s.lambda1, s.s_alpha).ok();
    let rho = match (cfg.rho, geometry) {
        (Some(r), _) => r,
        (None, Some(g)) => g.rho_mp,
        (None, None) => {
            return Err(Failure::Usage(format!(
                "(lambda, mu) is {}; pass --rho for a ball outside B0 and C0",
                s.classification.label.as_str()
            )))
        }
    };
    let start = if s.params.mu > 0.0 {
        RadialFunction::zeros(&s.grid)
    } else {
        let amp = ((s.params.lambda - s.lambda1) / (2.0 * s.params.mu.abs())).exp() / s.phi1.max_abs();
        RadialFunction::new(&s.grid, s.phi1.values().iter().map(|v| v * amp).collect())?
    };
    let result = minimize_in_ball(&s.params, &s.grid, rho, &start, &s.tol)?;
    let fiber = if result.solution.max_abs() > 0.0 {
        Some(fiber_profile(&s.params, &s.grid, &result.solution, &fiber_samples())?)
    } else {
        None
    };
    Ok(LocalMin { result, geometry, rho, fiber })
}

pub struct Mountain {
    pub report: MountainPassReport,
    pub initial_max: f64,
    pub epsilon: Option<f64>,
    pub level: Option<LevelEstimate>,
    /// Location of the fiber maximum of the mountain-pass solution.
    pub fiber_peak: Option<f64>,
}

impl Mountain {
    /// Extrapolated level when available, else the raw one.
    pub fn level_value(&self) -> f64 {
        self.level.map_or(self.report.result.energy, |l| l.extrapolated)
    }
}

/// μ ≥ 0: the segment from 0 to `t₀φ₁`, `t₀` grown by 1.5 until
/// `I(t₀φ₁) < 0`. μ < 0: the bubble path from the local minimizer.
pub fn mountain(s: &Setup, local: Option<&LocalMin>) -> Result<Mountain, Failure> {
    let (path, epsilon) = if s.params.mu >= 0.0 {
        let f = Functional::new(s.params, &s.grid)?;
        let mut t0 = 1.0;
        let end = loop {
            let e: Vec<f64> = s.phi1.values().iter().map(|v| v * t0).collect();
            if f.value(&e)? < 0.0 {
                break e;
            }
            t0 *= 1.5;
            if t0 > 1e12 {
                return Err(Failure::Numerical("no negative endpoint along the first eigenfunction".into()));
            }
        };
        let zero = vec![0.0; s.grid.len()];
        (PathState::segment(&s.params, &s.grid, &zero, &end, s.tol.path_nodes)?, None)
    } else {
        let Some(lm) = local else {
            return Err(Failure::Usage("the mountain pass for mu < 0 starts from the local minimizer".into()));
        };
        if !lm.result.converged() {
            return Err(Failure::Numerical(format!("local minimizer not converged ({:?})", lm.result.status)));
        }
        let rho = lm.geometry.map_or(lm.rho, |g| g.rho_mp);
        let path = find_initial_path(
            &s.params,
            &s.grid,
            &lm.result.solution,
            s.s_alpha,
            rho,
            PATH_MARGIN * s.e_th,
            s.tol.path_nodes,
        )?;
        let eps = path.epsilon;
        (path, eps)
    };
    let initial_max = path.max_energy();
    let report = mountain_pass(&s.params, &s.grid, path, &s.tol)?;
    let r = &report.result;
    let (level, fiber_peak) = if r.converged() {
        let level = if s.grid.len() >= RICHARDSON_MIN_NODES {
            Some(richardson_level(&s.params, &s.grid, r, s.grid.len() / 2, &s.tol)?)
        } else {
            None
        };
        let f = Functional::new(s.params, &s.grid)?;
        (level, f.fiber_peak(&f.integrals(r.solution.values())?))
    } else {
        (None, None)
    };
    Ok(Mountain { report, initial_max, epsilon, level, fiber_peak })
}

pub fn solve_json(r: &SolveResult, params: &ProblemParams) -> Value {
    json!({
        "kind": r.kind,
        "status": r.status,
        "energy": r.energy,
        "residual": r.residual,
        "nehari": r.nehari,
        "iterations": r.iterations,
        "norm_grad": r.norm_grad,
        "rho_mp": r.rho_mp,
        "u0": r.solution.values()[0],
        "min_value": r.solution.values().iter().cloned().fold(f64::INFINITY, f64::min),
        "params": params,
    })
}

pub fn profile_table(name: &str, grid: &RadialGrid, u: &RadialFunction) -> Table {
    let mut t = Table::new(name, &["r", "u"]);
    for (r, v) in grid.nodes().iter().zip(u.values()) {
        t.push_numbers(&[*r, *v]);
    }
    t
}

pub fn fiber_table(name: &str, fiber: &FiberProfile) -> Table {
    let mut t = Table::new(name, &["t", "energy"]);
    for (a, b) in &fiber.samples {
        t.push_numbers(&[*a, *b]);
    }
    t
}

pub fn setup_json(s: &Setup) -> Value {
    json!({
        "params": s.params,
        "grid": {"N": s.grid.dim(), "alpha": s.grid.alpha(), "nodes": s.grid.len(), "grading": s.grid.grading()},
        "lambda1": s.lambda1,
        "S_alpha": s.s_alpha,
        "E_th": s.e_th,
        "classification": s.classification,
    })
}

pub fn local_json(s: &Setup, lm: &LocalMin) -> Value {
    let first = lm.fiber.as_ref().and_then(|f| f.extremes.first().copied());
    json!({
        "solution": solve_json(&lm.result, &s.params),
        "rho": lm.rho,
        "geometry": lm.geometry,
        "fiber_first_extreme": first,
        "fiber_extremes": lm.fiber.as_ref().map(|f| f.extremes.clone()),
    })
}

pub fn mountain_json(s: &Setup, m: &Mountain) -> Value {
    json!({
        "solution": solve_json(&m.report.result, &s.params),
        "sweeps": m.report.sweeps,
        "refinement_iterations": m.report.refinement_iterations,
        "initial_path_max": m.initial_max,
        "final_path_max": m.report.final_path_max,
        "path_epsilon": m.epsilon,
        "level": m.level,
        "level_value": m.level_value(),
        "fiber_peak": m.fiber_peak,
        "level_history_monotone": m.report.level_history.iter().all(|w| w.1 <= w.0 + 1e-12 * (1.0 + w.0.abs())),
    })
}

pub fn history_table(m: &Mountain) -> Table {
    let mut t = Table::new("level_history", &["sweep", "before", "after"]);
    for (k, (a, b)) in m.report.level_history.iter().enumerate() {
        t.push(vec![k.to_string(), num(*a), num(*b)]);
    }
    t
}
