//! Property tests of the discrete functional.

use std::f64::consts::PI;

use henon_core::functional::{fiber_profile, ExtremeKind};
use henon_core::{Functional, Grading, ProblemParams, RadialFunction, RadialGrid};
use proptest::prelude::*;

/// Squared first zeros of J_{N/2-1} for N = 3..6.
const LAMBDA1: [f64; 4] = [PI * PI, 14.681970642123893, 20.190728556426627, 26.374616427163247];

fn profile(grid: &RadialGrid, amp: f64, c: &[f64], positive: bool) -> Vec<f64> {
    let mut v = grid.sample(|r| {
        let s: f64 = c.iter().enumerate().map(|(k, a)| a * ((k as f64 + 1.0) * PI * r).cos()).sum();
        if positive {
            amp * (1.0 - r * r) * (1.2 + 0.2 * s)
        } else {
            amp * (1.0 - r) * s
        }
    });
    let n = v.len();
    v[n - 1] = 0.0;
    v
}

fn setup() -> impl Strategy<Value = (ProblemParams, RadialGrid)> {
    (3usize..=6, -1.5f64..2.0, -30.0f64..30.0, -10.0f64..10.0, prop::bool::ANY).prop_map(|(n, a, l, m, geo)| {
        let grading = if geo { Grading::Geometric } else { Grading::Uniform };
        (ProblemParams::new(n, a, l, m).unwrap(), RadialGrid::new(n, a, 128, grading).unwrap())
    })
}

fn coefficients() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn derivative_matches_central_difference(
        (p, g) in setup(), amp in 0.2f64..3.0, cu in coefficients(), cv in coefficients()
    ) {
        let f = Functional::new(p, &g).unwrap();
        let u = profile(&g, amp, &cu, true);
        let v = profile(&g, 1.0, &cv, false);
        let d = f.derivative(&u).unwrap();
        let exact: f64 = d.iter().zip(&v).map(|(a, b)| a * b).sum();
        let h = 1e-4;
        let at = |s: f64| {
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + s * b).collect();
            f.value(&w).unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let scale = 1.0 + exact.abs() + f.value(&u).unwrap().abs();
        prop_assert!((fd - exact).abs() < 1e-6 * scale, "{fd} vs {exact}");
    }

    #[test]
    fn nehari_is_the_pairing_with_u((p, g) in setup(), amp in 0.2f64..3.0, c in coefficients()) {
        let f = Functional::new(p, &g).unwrap();
        let u = profile(&g, amp, &c, true);
        let d = f.derivative(&u).unwrap();
        let pairing: f64 = d.iter().zip(&u).map(|(a, b)| a * b).sum();
        let nehari = f.nehari(&u).unwrap();
        let it = f.integrals(&u).unwrap();
        let scale = it.dirichlet + it.critical + (p.lambda * it.mass).abs() + (p.mu * it.log_mass).abs();
        prop_assert!((pairing - nehari).abs() <= 1e-10 * scale);
    }

    #[test]
    fn fiber_value_is_energy_of_scaled_function(
        (p, g) in setup(), amp in 0.2f64..3.0, c in coefficients(), t in 0.05f64..5.0
    ) {
        let f = Functional::new(p, &g).unwrap();
        let u = profile(&g, amp, &c, true);
        let tu: Vec<f64> = u.iter().map(|x| t * x).collect();
        let direct = f.value(&tu).unwrap();
        let it = f.integrals(&u).unwrap();
        let scaled = f.fiber_value(&it, t);
        prop_assert!((direct - scaled).abs() <= 1e-10 * (1.0 + direct.abs()), "{direct} vs {scaled}");
        let q = p.critical_exponent();
        let t2 = t * t;
        let formula = 0.5 * t2 * it.dirichlet - t.powf(q) / q * it.critical
            - 0.5 * p.mu * t2 * t2.ln() * it.mass
            - 0.5 * t2 * (p.lambda * it.mass + p.mu * (it.log_mass - it.mass));
        prop_assert!((direct - formula).abs() <= 1e-10 * (1.0 + direct.abs()), "{direct} vs {formula}");
    }

    #[test]
    fn poincare_inequality((p, g) in setup(), amp in 0.2f64..3.0, c in coefficients(), positive in prop::bool::ANY) {
        let f = Functional::new(p, &g).unwrap();
        let u = profile(&g, amp, &c, positive);
        let it = f.integrals(&u.iter().map(|x| x.abs()).collect::<Vec<_>>()).unwrap();
        let l1 = LAMBDA1[p.dim - 3];
        prop_assert!(it.dirichlet >= l1 * it.mass * (1.0 - 1e-12));
    }

    #[test]
    fn positive_mu_has_one_fiber_maximum(
        n in 3usize..=6, a in 0.0f64..2.0, l in -20.0f64..20.0, m in 0.5f64..5.0,
        amp in 0.2f64..3.0, c in coefficients()
    ) {
        let p = ProblemParams::new(n, a, l, m).unwrap();
        let g = RadialGrid::new(n, a, 128, Grading::Geometric).unwrap();
        let u = RadialFunction::new(&g, profile(&g, amp, &c, true)).unwrap();
        let f = Functional::new(p, &g).unwrap();
        let it = f.integrals(u.values()).unwrap();
        let ts: Vec<f64> = (0..4001).map(|k| 10f64.powf(-8.0 + 16.0 * k as f64 / 4000.0)).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| f.fiber_value(&it, t)).collect();
        let signs: Vec<bool> = vals.windows(2).filter(|w| w[1] != w[0]).map(|w| w[1] > w[0]).collect();
        let flips: Vec<usize> = (1..signs.len()).filter(|&i| signs[i] != signs[i - 1]).collect();
        prop_assert_eq!(flips.len(), 1);
        prop_assert!(signs[0] && !signs[signs.len() - 1]);
        let peak = f.fiber_peak(&it).unwrap();
        let window: Vec<f64> = (0..401).map(|k| peak * 10f64.powf(-1.0 + 2.0 * k as f64 / 400.0)).collect();
        let fp = fiber_profile(&p, &g, &u, &window).unwrap();
        prop_assert_eq!(fp.extreme_count(), 1);
        prop_assert_eq!(fp.extremes[0].kind, ExtremeKind::Max);
        prop_assert!((fp.extremes[0].t / peak).ln().abs() < 2.0 * 10f64.ln() / 400.0);
    }
}
