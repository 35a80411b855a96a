//! First Dirichlet eigenvalue against squared Bessel zeros.

use henon_core::eigen::{first_eigenpair, richardson};
use henon_core::{Grading, RadialGrid};

/// J_ν(x) by its power series; adequate for x below 10.
fn bessel_j(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    for k in 1..80 {
        let k = k as f64;
        term *= -half * half / (k * (k + nu));
        sum += term;
    }
    sum
}

/// Lanczos approximation, g = 7.
fn gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// First positive zero of J_ν by a scan and bisection.
fn first_zero(nu: f64) -> f64 {
    let mut a = 0.5;
    while bessel_j(nu, a + 0.01) > 0.0 {
        a += 0.01;
    }
    let mut b = a + 0.01;
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if bessel_j(nu, m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn extrapolated(dim: usize, nodes: usize) -> f64 {
    let fine = first_eigenpair(&RadialGrid::new(dim, 0.0, nodes, Grading::Uniform).unwrap()).unwrap().lambda1;
    let coarse =
        first_eigenpair(&RadialGrid::new(dim, 0.0, (nodes - 1) / 2 + 1, Grading::Uniform).unwrap()).unwrap().lambda1;
    richardson(coarse, fine, 2.0)
}

#[test]
fn oracle_reproduces_known_zeros() {
    assert!((first_zero(0.5) - std::f64::consts::PI).abs() < 1e-12);
    // tan x = x
    let z = first_zero(1.5);
    assert!((z.tan() - z).abs() < 1e-9 * z);
}

#[test]
fn eigenvalues_match_bessel_zeros() {
    for (dim, tol) in [(3, 1e-6), (4, 1e-5), (5, 1e-5), (6, 1e-5)] {
        let j = first_zero(dim as f64 / 2.0 - 1.0);
        let l = extrapolated(dim, 8193);
        assert!((l - j * j).abs() < tol, "N = {dim}: {l} vs {}", j * j);
    }
}
