//! Acceptance suite. Every test prints one PASS/FAIL line for its criterion
//! and then asserts it.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use henon_core::bubbles::{
    asymptotic_rate, best_constant, epsilon_sequence, log_moment, sobolev_constant, verify_bubble_pde, BubbleSpec,
    LogMomentForm, RateVerdict,
};
use henon_core::functional::ExtremeKind;
use henon_core::shooting::{find_positive_solution, ScanOptions};
use henon_core::solvers::{c_kappa_estimate, refine_on_grid, SolveResult, Tolerances};
use henon_core::{Functional, Grading, ProblemParams, RadialFunction, RadialGrid};
use henon_lab::commands::lambda1_estimate;
use henon_lab::pipeline::{self, Setup};
use henon_lab::{parse_args, run, ExperimentConfig};
use serde_json::Value;

fn verdict(id: u32, title: &str, pass: bool, detail: &str, elapsed: Duration) {
    let status = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id} {status}: {title} ({detail}; {:.1} s)\n", elapsed.as_secs_f64());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn config(sub: &str, n: usize, alpha: f64, lambda: f64, mu: f64, nodes: usize, grading: &str) -> ExperimentConfig {
    let args = [
        "henon".to_string(),
        sub.to_string(),
        format!("--N={n}"),
        format!("--alpha={alpha}"),
        format!("--lambda={lambda}"),
        format!("--mu={mu}"),
        format!("--nodes={nodes}"),
        format!("--grading={grading}"),
    ];
    parse_args(args).unwrap()
}

fn cli(args: &[String], out: &Path) -> (i32, Value) {
    let mut argv = vec!["henon".to_string()];
    argv.extend(args.iter().cloned());
    argv.push(format!("--out={}", out.display()));
    let code = run(argv);
    let text = std::fs::read_to_string(out.join("results.json")).unwrap();
    (code, serde_json::from_str(&text).unwrap())
}

/// First zero of J_{3/2}, the root of tan x = x in (π, 3π/2).
fn bessel_three_halves_zero() -> f64 {
    let f = |x: f64| x.sin() - x * x.cos();
    let (mut a, mut b) = (std::f64::consts::PI, 1.5 * std::f64::consts::PI - 1e-9);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(a) * f(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn criterion_1_first_eigenvalue() {
    let pi2 = std::f64::consts::PI.powi(2);
    let j = bessel_three_halves_zero();
    let mut pass = true;
    let mut detail = Vec::new();
    let start = Instant::now();
    for (n, exact, tol) in [(3, pi2, 1e-6), (5, j * j, 1e-5)] {
        let t = Instant::now();
        let e = lambda1_estimate(n, 0.0, 8192).unwrap();
        let (err, dt) = ((e.extrapolated - exact).abs(), t.elapsed());
        pass &= err < tol && dt < Duration::from_secs(5);
        detail.push(format!("N={n} error {err:.2e} in {:.2} s", dt.as_secs_f64()));
    }
    verdict(1, "lambda1 against Bessel zeros", pass, &detail.join(", "), start.elapsed());
    assert!(pass);
}

#[test]
fn criterion_2_bubble_exactness() {
    let start = Instant::now();
    let mut pass = true;
    let mut worst_res: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    for (n, alpha) in [(3, 0.0), (3, 1.0), (4, 0.0), (5, 1.0), (3, -0.5)] {
        let res = verify_bubble_pde(&BubbleSpec::new(n, alpha, 0.1, 0.5).unwrap());
        let s: Vec<f64> =
            (0..=3).map(|k| 0.1 * 10f64.powi(-k)).map(|e| best_constant(alpha, n, 1e4 * e, e).unwrap()).collect();
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let drift = (hi - lo) / lo;
        pass &= res < 1e-10 && drift < 1e-6;
        worst_res = worst_res.max(res);
        worst_drift = worst_drift.max(drift);
    }
    let closed = 8.0 * std::f64::consts::PI / 6f64.sqrt();
    let quad = best_constant(0.0, 4, 1e3, 0.1).unwrap();
    let rel = ((quad - closed) / closed).abs().max(((sobolev_constant(0.0, 4).unwrap() - closed) / closed).abs());
    pass &= rel < 1e-5 && start.elapsed() < Duration::from_secs(30);
    let detail = format!("worst residual {worst_res:.1e}, worst drift {worst_drift:.1e}, S_4 relative error {rel:.1e}");
    verdict(2, "bubble equation and best constant", pass, &detail, start.elapsed());
    assert!(pass);
}

#[test]
fn criterion_3_integral_rates() {
    let start = Instant::now();
    let eps = epsilon_sequence(0.1, 7);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut logs = 0;
    for (n, alpha) in [(3usize, 0.0), (4, 0.0), (5, 1.0)] {
        let q_log = (n as f64 + alpha) / (n as f64 - 2.0);
        for f in [0.6, 0.8, 0.9, 1.0, 1.1, 1.2, 1.4] {
            let r = asymptotic_rate(alpha, n, q_log * f, true, &eps, 0.5).unwrap();
            if f == 1.0 {
                let r2 = r.log_fit.map_or(0.0, |l| l.r_squared);
                pass &= r.verdict == RateVerdict::LogCaseConfirmed && r2 >= 0.99;
                logs += 1;
            } else {
                let slope = r.fitted.map_or(f64::NAN, |l| l.slope);
                let dev = (slope - r.predicted).abs();
                pass &= r.verdict == RateVerdict::PowerLawConfirmed && dev <= 0.05;
                worst = worst.max(dev);
            }
        }
    }
    pass &= start.elapsed() < Duration::from_secs(120);
    let detail = format!("worst exponent deviation {worst:.3}, {logs} log cases flagged");
    verdict(3, "bubble integral rates", pass, &detail, start.elapsed());
    assert!(pass);
}

#[test]
fn criterion_4_log_moment() {
    let start = Instant::now();
    let five = log_moment(0.0, 5, 0.5, &epsilon_sequence(0.1, 3)).unwrap();
    let coefficient = match five.form {
        LogMomentForm::Leading { coefficient, .. } => coefficient,
        _ => f64::NAN,
    };
    let eps: Vec<f64> = (0..=8).map(|k| 10f64.powf(-2.0 - 0.25 * k as f64)).collect();
    let four = log_moment(0.0, 4, 0.1, &eps).unwrap();
    let (constant, ratio) = match four.form {
        LogMomentForm::LowerBound { constant, worst_ratio, .. } => (constant, worst_ratio),
        _ => (f64::NAN, f64::NAN),
    };
    let pass = coefficient > 0.0 && five.confirmed && constant > 0.0 && four.confirmed;
    let detail =
        format!("N=5 coefficient {coefficient:.4}, N=4 bound constant {constant:.4} worst value/bound {ratio:.4}");
    verdict(4, "log moment expansion", pass, &detail, start.elapsed());
    assert!(pass);
}

fn interior_positive(u: &RadialFunction) -> bool {
    let v = u.values();
    v[..v.len() - 1].iter().all(|&x| x > 0.0)
}

#[test]
fn criterion_5_mountain_pass_positive_mu() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, alpha, lambda, mu) in [(4, 0.0, 0.0, 1.0), (5, 1.0, -5.0, 0.5)] {
        let t = Instant::now();
        let cfg = config("solve-mp", n, alpha, lambda, mu, 2048, "geometric");
        let s = pipeline::setup(&cfg).unwrap();
        let m = pipeline::mountain(&s, None).unwrap();
        let r = &m.report.result;
        let c_m = m.level_value();
        let peak = m.fiber_peak.unwrap_or(f64::NAN);
        let ok = r.converged()
            && r.residual < 1e-8
            && interior_positive(&r.solution)
            && 0.0 < c_m
            && c_m < s.e_th
            && (peak - 1.0).abs() <= 0.01
            && t.elapsed() < Duration::from_secs(300);
        pass &= ok;
        detail.push(format!(
            "({n},{alpha},{lambda},{mu}) residual {:.1e} c_M {c_m:.6} (raw {:.6}) E_th {:.6} peak {peak:.4}",
            r.residual, r.energy, s.e_th
        ));
    }
    verdict(5, "mountain pass for mu > 0", pass, &detail.join("; "), start.elapsed());
    assert!(pass);
}

const C0_CASES: [(usize, f64, f64, f64); 3] = [(3, -0.5, -20.0, -10.0), (3, 1.0, -25.0, -10.0), (4, 0.0, -21.4, -15.0)];

#[test]
fn criterion_6_two_solutions_negative_mu() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, alpha, lambda, mu) in C0_CASES {
        let cfg = config("report", n, alpha, lambda, mu, 2048, "geometric");
        let s = pipeline::setup(&cfg).unwrap();
        let lm = pipeline::local_minimum(&s, &cfg).unwrap();
        let geo = lm.geometry.expect("C0 geometry");
        let m = pipeline::mountain(&s, Some(&lm)).unwrap();
        let c_m = m.level_value();
        let level = SolveResult { energy: c_m, ..m.report.result.clone() };
        let c_kappa = c_kappa_estimate(&[&lm.result, &level]).unwrap_or(f64::NAN);
        let first = lm.fiber.as_ref().and_then(|f| f.extremes.first().copied());
        let fiber_ok = first.is_some_and(|e| e.kind == ExtremeKind::Min && (e.t - 1.0).abs() <= 0.01);
        let ok = lm.result.converged()
            && m.report.result.converged()
            && lm.result.energy < 0.0
            && lm.result.norm_grad < geo.rho_mp
            && c_m < c_kappa + s.e_th
            && geo.sigma > 0.0
            && c_m >= geo.sigma
            && fiber_ok;
        pass &= ok;
        detail.push(format!(
            "({n},{alpha},{lambda},{mu}) converged {}/{} I(u)={:.5} |grad u|={:.3}<{:.3} sigma={:.4}<=c_M={c_m:.5}<{:.5} first fiber extreme {:?}",
            lm.result.converged(),
            m.report.result.converged(),
            lm.result.energy,
            lm.result.norm_grad,
            geo.rho_mp,
            geo.sigma,
            c_kappa + s.e_th,
            first.map(|e| (e.kind, e.t))
        ));
    }
    verdict(6, "local minimizer and mountain pass for mu < 0", pass, &detail.join("; "), start.elapsed());
    assert!(pass);
}

#[test]
fn criterion_7_nonexistence_sweep() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.0, -0.5] {
        let args: Vec<String> =
            ["sweep", "--N=3", &format!("--alpha={alpha}"), "--set=raster=20"].iter().map(|s| s.to_string()).collect();
        let (code, r) = cli(&args, &dir.path().join(format!("sweep{alpha}")));
        let r = &r["results"];
        let covered = r["points_with_nonnegative_margin"].as_u64().unwrap_or(0);
        pass &= code == 0 && r["violations"] == 0 && covered > 0 && r["d_range"] == serde_json::json!([1e-8, 1e8]);
        detail.push(format!(
            "alpha={alpha}: exit {code}, {covered} of {} points with margin >= 0, {} violations, {} findings at margin < 0",
            r["points"], r["violations"], r["findings_with_negative_margin"]
        ));
    }
    pass &= start.elapsed() < Duration::from_secs(600);
    verdict(7, "no positive solution where the margin is nonnegative", pass, &detail.join("; "), start.elapsed());
    assert!(pass);
}

/// Shooting root nearest the solver center value.
fn shooting_partner(params: &ProblemParams, u0: f64) -> henon_core::shooting::Root {
    let roots = find_positive_solution(params, (0.5 * u0, 2.0 * u0), &ScanOptions::default()).unwrap();
    roots
        .into_iter()
        .min_by(|a, b| (a.center - u0).abs().partial_cmp(&(b.center - u0).abs()).unwrap())
        .expect("shooting finds the solver solution")
}

fn sup_distance(grid: &RadialGrid, u: &RadialFunction, root: &henon_core::shooting::Root) -> f64 {
    grid.nodes().iter().zip(u.values()).map(|(r, v)| (v - root.shot.eval(*r)).abs()).fold(0.0, f64::max)
}

fn solver_energy(s: &Setup, u: &RadialFunction) -> f64 {
    Functional::new(s.params, &s.grid).unwrap().value(u.values()).unwrap()
}

#[test]
fn criterion_8_cross_validation() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    let tol = Tolerances::default();
    for (n, alpha, lambda, mu) in C0_CASES {
        let cfg = config("solve-min", n, alpha, lambda, mu, 2048, "uniform");
        let s = pipeline::setup(&cfg).unwrap();
        let lm = pipeline::local_minimum(&s, &cfg).unwrap();
        let u = &lm.result.solution;
        let root = shooting_partner(&s.params, u.values()[0]);
        let sup = sup_distance(&s.grid, u, &root);
        let e = root.shot.energy(&s.params).total;
        let rel = ((solver_energy(&s, u) - e) / e).abs();
        pass &= lm.result.converged() && sup < 1e-4 && rel < 1e-6;
        detail.push(format!("local min ({n},{alpha},{lambda},{mu}) sup {sup:.1e} energy {rel:.1e}"));
    }
    let mp_cases = [(4, 0.0, 0.0, 1.0), (5, 1.0, -5.0, 0.5), C0_CASES[0], C0_CASES[1], C0_CASES[2]];
    for (n, alpha, lambda, mu) in mp_cases {
        let cfg = config("solve-mp", n, alpha, lambda, mu, 2048, "geometric");
        let s = pipeline::setup(&cfg).unwrap();
        let lm = (mu < 0.0).then(|| pipeline::local_minimum(&s, &cfg).unwrap());
        let m = pipeline::mountain(&s, lm.as_ref()).unwrap();
        let mid = RadialGrid::new(n, alpha, 4096, Grading::Geometric).unwrap();
        let fine = RadialGrid::new(n, alpha, 8192, Grading::Geometric).unwrap();
        let rm = refine_on_grid(&s.params, &s.grid, &m.report.result.solution, &mid, &tol).unwrap();
        let rf = refine_on_grid(&s.params, &s.grid, &m.report.result.solution, &fine, &tol).unwrap();
        let ratio = (fine.len() - 1) as f64 / (mid.len() - 1) as f64;
        let level = rf.energy + (rf.energy - rm.energy) / (ratio * ratio - 1.0);
        let root = shooting_partner(&s.params, rf.solution.values()[0]);
        let sup = sup_distance(&fine, &rf.solution, &root) / root.center;
        let e = root.shot.energy(&s.params).total;
        let rel = ((level - e) / e).abs();
        pass &= m.report.result.converged() && rm.converged() && rf.converged() && sup < 1e-4 && rel < 1e-6;
        detail.push(format!("mountain pass ({n},{alpha},{lambda},{mu}) sup/d {sup:.1e} energy {rel:.1e}"));
    }
    verdict(8, "solver against shooting", pass, &detail.join("; "), start.elapsed());
    assert!(pass);
}

#[test]
fn criterion_9_inequality_suites() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (alpha, lambda, mu, case) in [(0.0, 2.0, -0.5, "B0"), (-0.5, -20.0, -10.0, "C0")] {
        let args: Vec<String> = [
            "verify-inequalities".to_string(),
            "--N=3".into(),
            format!("--alpha={alpha}"),
            format!("--lambda={lambda}"),
            format!("--mu={mu}"),
            "--set=samples=100".into(),
            "--set=directions=200".into(),
        ]
        .to_vec();
        let (code, r) = cli(&args, &dir.path().join(case));
        let r = &r["results"];
        let slack = r["log_sobolev"]["worst_slack"].as_f64().unwrap_or(f64::NAN);
        let consts = r["expansion"]["constants"].as_array().cloned().unwrap_or_default();
        let finite = consts.len() == 3
            && consts
                .iter()
                .all(|c| ["b1", "b2"].iter().all(|k| c["constants"][k].as_f64().is_some_and(f64::is_finite)));
        let bound = &r["sphere"]["bound"];
        let min_e = bound["min_energy"].as_f64().unwrap_or(f64::NAN);
        let sigma = bound["sigma"].as_f64().unwrap_or(f64::NAN);
        let ok = code == 0
            && slack >= -1e-8
            && finite
            && r["sphere"]["case"] == case
            && bound["samples"] == 200
            && min_e >= sigma - 1e-6;
        pass &= ok;
        detail.push(format!("{case}: log-Sobolev slack {slack:.2e}, sphere min I {min_e:.4} >= sigma {sigma:.4}"));
    }
    verdict(9, "inequality suites", pass, &detail.join("; "), start.elapsed());
    assert!(pass);
}
