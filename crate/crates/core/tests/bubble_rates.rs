//! Dilation invariance and deficit rates of the cut-off bubbles.

use henon_core::bubbles::{best_constant, critical_deficit, dirichlet_deficit, BubbleSpec};
use henon_core::fit::fit_line;

const CASES: [(usize, f64); 5] = [(3, 0.0), (3, 1.0), (4, 0.0), (5, 1.0), (3, -0.5)];

#[test]
fn best_constant_is_dilation_invariant() {
    for (n, a) in CASES {
        let s: Vec<f64> = (0..4)
            .map(|k| {
                let eps = 10f64.powi(-k);
                best_constant(a, n, 1e4 * eps, eps).unwrap()
            })
            .collect();
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((hi - lo) / lo < 1e-6, "({n}, {a}): {s:?}");
    }
}

fn slope(n: usize, a: f64, deficit: fn(&BubbleSpec) -> henon_core::Result<f64>) -> f64 {
    let eps: Vec<f64> = (0..9).map(|k| 1e-2 * 10f64.powf(-(k as f64) / 4.0)).collect();
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> =
        eps.iter().map(|&e| deficit(&BubbleSpec::new(n, a, e, 0.25).unwrap()).unwrap().abs().ln()).collect();
    fit_line(&x, &y).unwrap().slope
}

#[test]
fn dirichlet_deficit_decays_like_eps_to_n_minus_two() {
    for (n, a) in CASES {
        let s = slope(n, a, dirichlet_deficit);
        assert!((s - (n as f64 - 2.0)).abs() < 0.1, "({n}, {a}): {s}");
    }
}

#[test]
fn critical_deficit_decays_like_eps_to_n_plus_alpha() {
    for (n, a) in CASES {
        let s = slope(n, a, critical_deficit);
        assert!((s - (n as f64 + a)).abs() < 0.1, "({n}, {a}): {s}");
    }
}
