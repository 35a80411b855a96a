//! One function per subcommand.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use henon_core::bubbles::{self, asymptotic_rate, best_constant, epsilon_sequence, log_moment, BubbleSpec};
use henon_core::eigen::{first_eigenpair, richardson};
use henon_core::functional::log_sobolev_check;
use henon_core::inequalities::{expansion_inequalities, linear_grid, log_grid, sphere_bound};
use henon_core::regions;
use henon_core::shooting::{find_positive_solution, sweep_point, ScanOptions, SweepPoint, SweepReport};
use henon_core::solvers::{c_kappa_estimate, level_report, SolveResult, Thresholds, VerdictStatus};
use henon_core::{Grading, ProblemParams, RadialGrid};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::directions::{random_directions, rng};
use crate::output::{num, opt, Table};
use crate::pipeline;
use crate::{Failure, Outcome};

pub fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    match cfg.subcommand.as_str() {
        "eigen" => eigen(cfg),
        "sobolev" => sobolev(cfg),
        "classify" => classify(cfg),
        "solve-min" => solve_min(cfg),
        "solve-mp" => solve_mp(cfg),
        "shoot" => shoot(cfg),
        "sweep" => sweep(cfg),
        "verify-bubbles" => verify_bubbles(cfg),
        "verify-asymptotics" => verify_asymptotics(cfg),
        "verify-inequalities" => verify_inequalities(cfg),
        "report" => report(cfg),
        other => Err(Failure::Usage(format!("unknown subcommand '{other}'"))),
    }
}

fn grid_json(g: &RadialGrid) -> Value {
    json!({"N": g.dim(), "alpha": g.alpha(), "nodes": g.len(), "grading": g.grading()})
}

/// λ₁ on `nodes` uniform nodes, extrapolated with the half-size grid.
pub struct EigenEstimate {
    pub fine: f64,
    pub coarse: f64,
    pub extrapolated: f64,
}

pub fn lambda1_estimate(dim: usize, alpha: f64, nodes: usize) -> Result<EigenEstimate, Failure> {
    let fine = first_eigenpair(&RadialGrid::new(dim, alpha, nodes, Grading::Uniform)?)?.lambda1;
    let coarse_nodes = (nodes - 1) / 2 + 1;
    let coarse = first_eigenpair(&RadialGrid::new(dim, alpha, coarse_nodes, Grading::Uniform)?)?.lambda1;
    let h_ratio = (nodes - 1) as f64 / (coarse_nodes - 1) as f64;
    let extrapolated = if (h_ratio - 2.0).abs() < 1e-12 {
        richardson(coarse, fine, 2.0)
    } else {
        fine + (fine - coarse) / (h_ratio * h_ratio - 1.0)
    };
    Ok(EigenEstimate { fine, coarse, extrapolated })
}

fn eigen(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let grid = RadialGrid::new(cfg.dim, cfg.alpha, cfg.nodes, cfg.grading)?;
    let pair = first_eigenpair(&grid)?;
    let coarse_nodes = (cfg.nodes - 1) / 2 + 1;
    let coarse_grid = RadialGrid::new(cfg.dim, cfg.alpha, coarse_nodes, cfg.grading)?;
    let coarse = first_eigenpair(&coarse_grid)?.lambda1;
    let ratio = (cfg.nodes - 1) as f64 / (coarse_nodes - 1) as f64;
    let extrapolated = pair.lambda1 + (pair.lambda1 - coarse) / (ratio * ratio - 1.0);
    let mut t = Table::new("phi1", &["r", "phi1"]);
    for (r, v) in grid.nodes().iter().zip(pair.phi1.values()) {
        t.push_numbers(&[*r, *v]);
    }
    let mut o = Outcome::new(json!({
        "grid": grid_json(&grid),
        "lambda1": pair.lambda1,
        "lambda1_coarse": coarse,
        "coarse_nodes": coarse_nodes,
        "lambda1_extrapolated": extrapolated,
        "iterations": pair.iterations,
    }));
    o.tables.push(t);
    Ok(o)
}

fn sobolev(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let s_alpha = bubbles::sobolev_constant(cfg.alpha, cfg.dim)?;
    let e_th = regions::threshold_energy(cfg.alpha, cfg.dim, s_alpha);
    let mut t = Table::new("best_constant", &["epsilon", "r_max", "S"]);
    let mut values = Vec::new();
    for k in 0..=cfg.decades {
        let eps = cfg.eps * 10f64.powi(-(k as i32));
        let s = best_constant(cfg.alpha, cfg.dim, 1e4 * eps, eps)?;
        t.push_numbers(&[eps, 1e4 * eps, s]);
        values.push(s);
    }
    let drift = relative_drift(&values);
    let mut o = Outcome::new(json!({
        "N": cfg.dim,
        "alpha": cfg.alpha,
        "critical_exponent": henon_core::functional::critical_exponent(cfg.dim, cfg.alpha),
        "S_alpha": s_alpha,
        "E_th": e_th,
        "epsilon_drift": drift,
    }));
    o.tables.push(t);
    Ok(o)
}

fn relative_drift(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / lo.abs()
}

fn classify(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let params = ProblemParams::new(cfg.dim, cfg.alpha, cfg.lambda, cfg.mu)?;
    let l1 = lambda1_estimate(cfg.dim, cfg.alpha, cfg.nodes)?;
    let s_alpha = bubbles::sobolev_constant(cfg.alpha, cfg.dim)?;
    let c = regions::classify(&params, l1.extrapolated, s_alpha);
    let geometry = regions::mp_geometry_constants(&params, l1.extrapolated, s_alpha).ok();
    Ok(Outcome::new(json!({
        "label": c.label,
        "margins": c.margins,
        "params": params,
        "lambda1": l1.extrapolated,
        "S_alpha": s_alpha,
        "E_th": regions::threshold_energy(cfg.alpha, cfg.dim, s_alpha),
        "geometry": geometry,
    })))
}

fn solve_min(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let s = pipeline::setup(cfg)?;
    let lm = pipeline::local_minimum(&s, cfg)?;
    let mut o = Outcome::new(json!({"setup": pipeline::setup_json(&s), "local_min": pipeline::local_json(&s, &lm)}));
    o.tables.push(pipeline::profile_table("local_min", &s.grid, &lm.result.solution));
    if let Some(f) = &lm.fiber {
        o.tables.push(pipeline::fiber_table("fiber_local_min", f));
    }
    if !lm.result.converged() && lm.result.status != henon_core::solvers::SolveStatus::TrivialMinimizer {
        o.unconverged.push(format!("local minimizer: {:?}", lm.result.status));
    }
    Ok(o)
}

fn solve_mp(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let s = pipeline::setup(cfg)?;
    let lm = if s.params.mu < 0.0 { Some(pipeline::local_minimum(&s, cfg)?) } else { None };
    let m = pipeline::mountain(&s, lm.as_ref())?;
    let mut results = json!({"setup": pipeline::setup_json(&s), "mountain_pass": pipeline::mountain_json(&s, &m)});
    let mut o = Outcome::default();
    if let Some(lm) = &lm {
        results["local_min"] = pipeline::local_json(&s, lm);
        o.tables.push(pipeline::profile_table("local_min", &s.grid, &lm.result.solution));
    }
    o.results = results;
    o.tables.push(pipeline::profile_table("mountain_pass", &s.grid, &m.report.result.solution));
    o.tables.push(pipeline::history_table(&m));
    if !m.report.result.converged() {
        o.unconverged.push(format!("mountain pass: {:?}", m.report.result.status));
    }
    Ok(o)
}

/// Solves, then checks the level inequalities. The mountain-pass level
/// entering the verdicts is the extrapolated one when available.
fn report(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let s = pipeline::setup(cfg)?;
    let lm = if s.params.mu < 0.0 { Some(pipeline::local_minimum(&s, cfg)?) } else { None };
    let m = pipeline::mountain(&s, lm.as_ref())?;
    let mp_level = SolveResult { energy: m.level_value(), ..m.report.result.clone() };
    let local = lm.as_ref().map(|l| &l.result);
    let found: Vec<&SolveResult> = local.into_iter().chain(std::iter::once(&mp_level)).collect();
    let th = Thresholds {
        e_th: Some(s.e_th),
        sigma: lm.as_ref().and_then(|l| l.geometry).map(|g| g.sigma),
        c_kappa: c_kappa_estimate(&found),
        match_tolerance: 1e-6,
    };
    let verdicts = level_report(&s.params, local, Some(&mp_level), &th);
    let mut o = Outcome::default();
    let mut table = Table::new("verdicts", &["check", "status", "lhs", "rhs"]);
    for v in &verdicts {
        table.push(vec![v.check.clone(), format!("{:?}", v.status).to_uppercase(), opt(v.lhs), opt(v.rhs)]);
        if v.status == VerdictStatus::Fail {
            o.violations.push(format!("level check failed: {}", v.check));
        }
    }
    let mp = &m.report.result;
    let min_value = mp.solution.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let fiber_ok = m.fiber_peak.is_some_and(|t| (t - 1.0).abs() <= 0.01);
    let mut checks = vec![
        ("mountain-pass residual below tolerance", mp.residual < cfg.tol),
        ("mountain-pass solution nonnegative with positive center", min_value >= 0.0 && mp.solution.values()[0] > 0.0),
        ("fiber maximum of the mountain-pass solution at t = 1 within 1%", fiber_ok),
    ];
    let mut first_extreme = None;
    if let Some(l) = &lm {
        first_extreme = l.fiber.as_ref().and_then(|f| f.extremes.first().copied());
        let ok = first_extreme
            .is_some_and(|e| e.kind == henon_core::functional::ExtremeKind::Min && (e.t - 1.0).abs() <= 0.01);
        checks.push(("fiber of the local minimizer has t = 1 as first extreme, a minimum", ok));
        let inside = l.result.norm_grad < l.rho;
        checks.push(("local minimizer strictly inside the ball", inside));
    }
    for (name, ok) in &checks {
        table.push(vec![name.to_string(), if *ok { "PASS" } else { "FAIL" }.into(), String::new(), String::new()]);
        if !ok {
            o.violations.push(format!("check failed: {name}"));
        }
    }
    if !mp.converged() {
        o.unconverged.push(format!("mountain pass: {:?}", mp.status));
    }
    if let Some(l) = &lm {
        if !l.result.converged() {
            o.unconverged.push(format!("local minimizer: {:?}", l.result.status));
        }
    }
    let mut results = json!({
        "setup": pipeline::setup_json(&s),
        "mountain_pass": pipeline::mountain_json(&s, &m),
        "thresholds": {"E_th": th.e_th, "sigma": th.sigma, "C_kappa_estimate": th.c_kappa},
        "verdicts": verdicts,
        "checks": checks.iter().map(|(n, ok)| json!({"check": n, "pass": ok})).collect::<Vec<_>>(),
    });
    if let Some(l) = &lm {
        results["local_min"] = pipeline::local_json(&s, l);
        results["local_min"]["fiber_first_extreme"] = json!(first_extreme);
        o.tables.push(pipeline::profile_table("local_min", &s.grid, &l.result.solution));
    }
    o.results = results;
    o.tables.push(table);
    o.tables.push(pipeline::profile_table("mountain_pass", &s.grid, &m.report.result.solution));
    Ok(o)
}

fn scan_options(cfg: &ExperimentConfig) -> ScanOptions {
    ScanOptions { per_decade: cfg.per_decade, ..ScanOptions::default() }
}

fn in_nonexistence_domain(p: &ProblemParams) -> bool {
    p.mu < 0.0 && p.alpha <= 0.0
}

fn shoot(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let params = ProblemParams::new(cfg.dim, cfg.alpha, cfg.lambda, cfg.mu)?;
    let roots = find_positive_solution(&params, (cfg.d_min, cfg.d_max), &scan_options(cfg))?;
    let mut o = Outcome::default();
    let mut table = Table::new("roots", &["index", "d", "energy", "nehari", "terminal", "steps"]);
    let mut list = Vec::new();
    for (k, r) in roots.iter().enumerate() {
        let e = r.shot.energy(&params);
        table.push(vec![
            k.to_string(),
            num(r.center),
            num(e.total),
            num(e.nehari),
            num(r.shot.terminal),
            r.shot.diagnostics.steps.to_string(),
        ]);
        list.push(json!({
            "d": r.center,
            "energy": e,
            "terminal": r.shot.terminal,
            "first_zero": r.shot.first_zero,
            "diagnostics": r.shot.diagnostics,
        }));
        let mut prof = Table::new(format!("profile_{k}"), &["r", "u"]);
        for p in &r.shot.profile {
            prof.push_numbers(&[p.r, p.u]);
        }
        o.tables.push(prof);
    }
    o.tables.insert(0, table);
    let mut margin = None;
    if in_nonexistence_domain(&params) {
        let l1 = lambda1_estimate(cfg.dim, cfg.alpha, 2048)?.extrapolated;
        let m = regions::nonexistence_margin(&params, l1)?;
        margin = Some(m);
        if m >= 0.0 && !roots.is_empty() {
            o.violations.push(format!("{} positive solution(s) with nonexistence margin {m:e}", roots.len()));
        }
    }
    o.results = json!({
        "params": params,
        "d_range": [cfg.d_min, cfg.d_max],
        "scan": scan_options(cfg),
        "nonexistence_margin": margin,
        "roots": list,
    });
    Ok(o)
}

/// Raster axis: `n` points evenly spaced on `[a, b]`.
fn axis(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Runs `job` over `0..count` on `workers` threads; results keep index order.
pub fn parallel_map<T: Send, F>(count: usize, workers: usize, job: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync,
{
    let workers = if workers == 0 { thread::available_parallelism().map_or(1, |n| n.get()) } else { workers };
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..workers.min(count.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let v = job(i);
                slots.lock().expect("no worker panicked")[i] = Some(v);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|v| v.expect("every index ran")).collect()
}

fn sweep(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    if !(cfg.alpha > -2.0 && cfg.alpha <= 0.0) {
        return Err(Failure::Usage("sweep needs alpha in (-2, 0]".into()));
    }
    if !(cfg.mu_max < 0.0 && cfg.mu_min <= cfg.mu_max) {
        return Err(Failure::Usage("sweep needs mu_min <= mu_max < 0".into()));
    }
    let l1 = lambda1_estimate(cfg.dim, cfg.alpha, 2048)?.extrapolated;
    let lmin = cfg.lambda_min.unwrap_or(l1 - 5.0);
    let lmax = cfg.lambda_max.unwrap_or(l1 + 5.0);
    if !(lmax >= lmin) {
        return Err(Failure::Usage("sweep needs lambda_min <= lambda_max".into()));
    }
    let mut pairs = Vec::new();
    for &mu in &axis(cfg.mu_min, cfg.mu_max, cfg.raster) {
        for &lambda in &axis(lmin, lmax, cfg.raster) {
            pairs.push((lambda, mu));
        }
    }
    let opts = scan_options(cfg);
    let points: Vec<Result<SweepPoint, henon_core::Error>> = parallel_map(pairs.len(), cfg.workers, |i| {
        let (lambda, mu) = pairs[i];
        sweep_point(cfg.dim, cfg.alpha, lambda, mu, l1, (cfg.d_min, cfg.d_max), &opts)
    });
    let points = points.into_iter().collect::<Result<Vec<_>, _>>()?;
    let report = SweepReport::from_points(points);
    let mut table = Table::new("raster", &["lambda", "mu", "label", "margin", "found", "d_star"]);
    let s_alpha = bubbles::sobolev_constant(cfg.alpha, cfg.dim)?;
    let mut found_outside = 0;
    for p in &report.points {
        let params = ProblemParams::new(cfg.dim, cfg.alpha, p.lambda, p.mu)?;
        let label = regions::classify(&params, l1, s_alpha).label;
        let d_star = p.roots.iter().map(|d| num(*d)).collect::<Vec<_>>().join(";");
        table.push(vec![
            num(p.lambda),
            num(p.mu),
            label.as_str().into(),
            num(p.margin),
            p.roots.len().to_string(),
            d_star,
        ]);
        if p.found() && p.margin < 0.0 {
            found_outside += 1;
        }
    }
    let mut o = Outcome::new(json!({
        "N": cfg.dim,
        "alpha": cfg.alpha,
        "lambda1": l1,
        "lambda_range": [lmin, lmax],
        "mu_range": [cfg.mu_min, cfg.mu_max],
        "raster": cfg.raster,
        "d_range": [cfg.d_min, cfg.d_max],
        "points": report.points.len(),
        "points_with_nonnegative_margin": report.points.iter().filter(|p| p.margin >= 0.0).count(),
        "findings_with_negative_margin": found_outside,
        "violations": report.violations,
    }));
    for p in report.points.iter().filter(|p| p.violation()) {
        o.violations.push(format!(
            "positive solution at lambda = {:e}, mu = {:e} with nonexistence margin {:e}",
            p.lambda, p.mu, p.margin
        ));
    }
    o.tables.push(table);
    Ok(o)
}

/// Tolerances of the bubble checks.
pub const BUBBLE_PDE_TOL: f64 = 1e-10;
pub const BEST_CONSTANT_DRIFT_TOL: f64 = 1e-6;

fn verify_bubbles(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let spec = BubbleSpec::new(cfg.dim, cfg.alpha, cfg.eps, cfg.rho_cut)?;
    let residual = bubbles::verify_bubble_pde(&spec);
    let mut t = Table::new("best_constant", &["epsilon", "S"]);
    let mut values = Vec::new();
    for k in 0..=cfg.decades {
        let eps = cfg.eps * 10f64.powi(-(k as i32));
        let s = best_constant(cfg.alpha, cfg.dim, 1e4 * eps, eps)?;
        t.push_numbers(&[eps, s]);
        values.push(s);
    }
    let drift = relative_drift(&values);
    let mut o = Outcome::new(json!({
        "N": cfg.dim,
        "alpha": cfg.alpha,
        "epsilon": cfg.eps,
        "pde_residual": residual,
        "best_constants": values,
        "epsilon_drift": drift,
    }));
    if !(residual < BUBBLE_PDE_TOL) {
        o.violations.push(format!("bubble residual {residual:e}"));
    }
    if !(drift < BEST_CONSTANT_DRIFT_TOL) {
        o.violations.push(format!("best-constant drift {drift:e}"));
    }
    o.tables.push(t);
    Ok(o)
}

fn verify_asymptotics(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let n = cfg.dim as f64;
    let beta = if cfg.weighted { cfg.alpha } else { 0.0 };
    let q = cfg.q.unwrap_or((n + beta) / (n - 2.0));
    let eps = epsilon_sequence(cfg.eps, cfg.decades);
    let rate = asymptotic_rate(cfg.alpha, cfg.dim, q, cfg.weighted, &eps, cfg.rho_cut)?;
    let mut t = Table::new("rates", &["epsilon", "value", "predicted", "fitted"]);
    let fitted = rate.fitted.map(|f| f.slope);
    for (e, v) in &rate.values {
        t.push(vec![num(*e), num(*v), num(rate.predicted), opt(fitted)]);
    }
    let mut o = Outcome::new(json!({
        "N": cfg.dim,
        "alpha": cfg.alpha,
        "q": q,
        "verdict": rate.verdict.label(),
        "rate": rate,
    }));
    o.tables.push(t);
    match rate.verdict {
        bubbles::RateVerdict::Mismatch => o.violations.push(format!("rate mismatch at q = {q}")),
        bubbles::RateVerdict::Inconclusive => o.unconverged.push(format!("rate fit inconclusive at q = {q}")),
        _ => {}
    }
    if cfg.dim >= 4 {
        let lm = log_moment(cfg.alpha, cfg.dim, cfg.rho_cut, &eps)?;
        let mut lt = Table::new("log_moment", &["epsilon", "value"]);
        for (e, v) in &lm.values {
            lt.push_numbers(&[*e, *v]);
        }
        o.tables.push(lt);
        if !lm.confirmed {
            o.violations.push("log-moment expansion not confirmed".into());
        }
        o.results["log_moment"] = json!(lm);
    }
    Ok(o)
}

pub const LOG_SOBOLEV_A: [f64; 4] = [0.1, 1.0, PI, 10.0];
pub const LOG_SOBOLEV_SLACK: f64 = -1e-8;
pub const EXPANSION_BETAS: [f64; 3] = [0.25, 0.5, 1.0];
pub const SPHERE_SLACK: f64 = 1e-6;

/// The x and y grids of the expansion certification.
pub fn expansion_grids(l1: f64, l2: f64) -> (Vec<f64>, Vec<f64>) {
    (linear_grid(l1, l2, 64), log_grid(1e-8, 10.0, 400))
}

fn verify_inequalities(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let grid = RadialGrid::new(cfg.dim, cfg.alpha, cfg.nodes, cfg.grading)?;
    let mut o = Outcome::default();

    let us = random_directions(cfg.seed, &grid, cfg.samples);
    let mut ls = Table::new("log_sobolev", &["sample", "slack"]);
    let mut worst = f64::INFINITY;
    for (k, u) in us.iter().enumerate() {
        let slack = log_sobolev_check(&grid, u, &LOG_SOBOLEV_A)?;
        worst = worst.min(slack);
        ls.push(vec![k.to_string(), num(slack)]);
    }
    if !(worst >= LOG_SOBOLEV_SLACK) {
        o.violations.push(format!("log-Sobolev slack {worst:e}"));
    }

    let (xs, ys) = expansion_grids(cfg.l1, cfg.l2);
    let mut ex = Table::new("expansion", &["beta", "B1", "B2_lower", "B2_upper", "B2"]);
    let mut constants = Vec::new();
    for beta in EXPANSION_BETAS {
        let c = expansion_inequalities(cfg.dim, cfg.alpha, beta, cfg.l1, cfg.l2, &xs, &ys)?;
        ex.push(vec![num(beta), num(c.b1), opt(c.b2_lower), num(c.b2_upper), num(c.b2)]);
        if !c.finite() {
            o.violations.push(format!("expansion constants not finite at beta = {beta}"));
        }
        constants.push(json!({"beta": beta, "constants": c}));
    }

    let params = ProblemParams::new(cfg.dim, cfg.alpha, cfg.lambda, cfg.mu)?;
    let lambda1 = first_eigenpair(&grid)?.lambda1;
    let s_alpha = bubbles::sobolev_constant(cfg.alpha, cfg.dim)?;
    let geometry = regions::mp_geometry_constants(&params, lambda1, s_alpha).ok();
    let sphere = match geometry {
        Some(g) => {
            let mut r = rng(cfg.seed.wrapping_add(1));
            let dirs: Vec<_> =
                (0..cfg.directions).map(|_| crate::directions::random_direction(&mut r, &grid)).collect();
            let b = sphere_bound(&params, &grid, g.rho_mp, g.sigma, &dirs)?;
            if !b.holds(SPHERE_SLACK) {
                o.violations.push(format!("sphere bound: min I = {:e} < sigma = {:e}", b.min_energy, b.sigma));
            }
            Some(json!({"case": g.case, "bound": b}))
        }
        None => None,
    };
    let label = regions::classify(&params, lambda1, s_alpha).label;
    o.results = json!({
        "log_sobolev": {"samples": cfg.samples, "a_values": LOG_SOBOLEV_A, "worst_slack": worst},
        "expansion": {"l1": cfg.l1, "l2": cfg.l2, "x_points": xs.len(), "y_range": [ys[0], ys[ys.len() - 1]], "y_points": ys.len(), "constants": constants},
        "sphere": sphere,
        "label": label,
        "sphere_skipped": geometry.is_none(),
    });
    o.tables.push(ls);
    o.tables.push(ex);
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let v = parallel_map(50, 4, |i| i * i);
        assert_eq!(v, (0..50).map(|i| i * i).collect::<Vec<_>>());
        assert!(parallel_map(0, 3, |i| i).is_empty());
    }

    #[test]
    fn axis_endpoints() {
        let a = axis(-1.0, 1.0, 5);
        assert_eq!(a.first(), Some(&-1.0));
        assert_eq!(a.last(), Some(&1.0));
        assert_eq!(axis(0.0, 2.0, 1), vec![1.0]);
    }
}
