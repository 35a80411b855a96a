//! Invariants of converged solves on modest grids.

use henon_core::bubbles::sobolev_constant;
use henon_core::eigen::first_eigenpair;
use henon_core::functional::fiber_profile;
use henon_core::regions::{mp_geometry_constants, threshold_energy};
use henon_core::solvers::{find_initial_path, minimize_in_ball, mountain_pass, PathState, SolveResult, Tolerances};
use henon_core::{Functional, Grading, ProblemParams, RadialFunction, RadialGrid};

fn check_converged(p: &ProblemParams, g: &RadialGrid, r: &SolveResult, tol: &Tolerances) {
    assert!(r.converged(), "{:?}", r.status);
    let f = Functional::new(*p, g).unwrap();
    let u = r.solution.values();
    let d = f.dirichlet(u);
    assert!(f.nehari(u).unwrap().abs() <= 1e-6 * (1.0 + d));
    assert!(f.residual(u).unwrap() <= tol.residual);
    assert!(u.iter().all(|&x| x >= 0.0));
}

fn log_t() -> Vec<f64> {
    (0..4001).map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 4000.0)).collect()
}

#[test]
fn positive_mu_mountain_pass() {
    let (n, a, l, m) = (4, 0.0, 0.0, 1.0);
    let p = ProblemParams::new(n, a, l, m).unwrap();
    let g = RadialGrid::new(n, a, 512, Grading::Geometric).unwrap();
    let f = Functional::new(p, &g).unwrap();
    let phi = first_eigenpair(&g).unwrap().phi1;
    let mut t0 = 1.0;
    let end = loop {
        let e: Vec<f64> = phi.values().iter().map(|v| v * t0).collect();
        if f.value(&e).unwrap() < 0.0 {
            break e;
        }
        t0 *= 1.5;
    };
    let tol = Tolerances::default();
    let path = PathState::segment(&p, &g, &vec![0.0; g.len()], &end, tol.path_nodes).unwrap();
    let rep = mountain_pass(&p, &g, path, &tol).unwrap();
    check_converged(&p, &g, &rep.result, &tol);
    assert!(rep.level_history.iter().all(|w| w.1 <= w.0));
    let fp = fiber_profile(&p, &g, &rep.result.solution, &log_t()).unwrap();
    let best = fp.samples.iter().cloned().fold((0.0, f64::NEG_INFINITY), |b, s| if s.1 > b.1 { s } else { b });
    assert!((best.0 - 1.0).abs() <= 0.01, "fiber maximum at t = {}", best.0);
}

#[test]
fn negative_mu_pair_of_solutions() {
    let (n, a, l, m) = (3, -0.5, -20.0, -10.0);
    let p = ProblemParams::new(n, a, l, m).unwrap();
    let g = RadialGrid::new(n, a, 512, Grading::Geometric).unwrap();
    let eig = first_eigenpair(&g).unwrap();
    let s = sobolev_constant(a, n).unwrap();
    let geo = mp_geometry_constants(&p, eig.lambda1, s).unwrap();
    let amp = ((l - eig.lambda1) / (2.0 * m.abs())).exp() / eig.phi1.max_abs();
    let start = RadialFunction::new(&g, eig.phi1.values().iter().map(|v| v * amp).collect()).unwrap();
    let tol = Tolerances::default();
    let lm = minimize_in_ball(&p, &g, geo.rho_mp, &start, &tol).unwrap();
    check_converged(&p, &g, &lm, &tol);
    assert!(lm.energy < 0.0 && lm.norm_grad < geo.rho_mp);
    let fp = fiber_profile(&p, &g, &lm.solution, &log_t()).unwrap();
    let first = fp.extremes[0];
    assert_eq!(first.kind, henon_core::functional::ExtremeKind::Min);
    assert!((first.t - 1.0).abs() <= 0.01, "first extreme at t = {}", first.t);
    let e_th = threshold_energy(a, n, s);
    let path = find_initial_path(&p, &g, &lm.solution, s, geo.rho_mp, 1e-10 * e_th, tol.path_nodes).unwrap();
    let rep = mountain_pass(&p, &g, path, &tol).unwrap();
    check_converged(&p, &g, &rep.result, &tol);
    assert!(rep.level_history.iter().all(|w| w.1 <= w.0));
    assert!(rep.result.energy >= geo.sigma);
    assert!(rep.result.energy < lm.energy + e_th);
}
