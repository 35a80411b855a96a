//! Seeded random radial functions vanishing at r = 1.

use std::f64::consts::PI;

use henon_core::bubbles::BubbleSpec;
use henon_core::{RadialFunction, RadialGrid};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const MODES: usize = 8;

fn fourier<R: Rng>(rng: &mut R, scale: f64) -> [f64; MODES] {
    let mut c = [0.0; MODES];
    for (k, v) in c.iter_mut().enumerate() {
        *v = scale * rng.gen_range(-1.0..1.0) / (k + 1) as f64;
    }
    c
}

fn cosine_series(c: &[f64; MODES], r: f64) -> f64 {
    c.iter().enumerate().map(|(k, a)| a * ((k as f64 + 0.5) * PI * r).cos()).sum()
}

/// One of three families, drawn uniformly: a random cosine series, a
/// positive profile `(1 − r²)(1 + small series)`, or a concentrated bubble
/// with a small perturbation. Bubble widths stay above eight local mesh
/// widths of `grid`.
pub fn random_direction<R: Rng>(rng: &mut R, grid: &RadialGrid) -> RadialFunction {
    let family = rng.gen_range(0..3);
    let c = fourier(rng, 1.0);
    let mut v = match family {
        0 => grid.sample(|r| cosine_series(&c, r)),
        1 => {
            let c = c.map(|a| 0.3 * a);
            grid.sample(|r| (1.0 - r * r) * (1.0 + cosine_series(&c, r)).max(0.0))
        }
        _ => {
            let x = grid.nodes();
            let (lo, hi) = ((2e-3f64).ln(), (0.5f64).ln());
            let eps = smallest_resolved(grid, (lo + rng.gen_range(0.0..1.0) * (hi - lo)).exp());
            let spec = BubbleSpec::new(grid.dim(), grid.alpha(), eps, 0.5).expect("bubble parameters are valid");
            let b = spec.sample(grid);
            let peak = b.max_abs();
            let c = c.map(|a| 0.05 * a);
            b.values().iter().zip(x).map(|(u, r)| u / peak + (1.0 - r) * cosine_series(&c, *r)).collect()
        }
    };
    let n = v.len();
    v[n - 1] = 0.0;
    if v.iter().all(|x| *x == 0.0) {
        v[0] = 1.0;
    }
    RadialFunction::new(grid, v).expect("length matches the grid")
}

/// Raises `eps` until the mesh width at `r = eps` is at most `eps / 8`.
fn smallest_resolved(grid: &RadialGrid, mut eps: f64) -> f64 {
    let x = grid.nodes();
    loop {
        let j = x.partition_point(|&r| r < eps).min(x.len() - 1);
        let h = x[j] - x[j.saturating_sub(1)];
        if eps >= 8.0 * h || eps >= 0.5 {
            return eps;
        }
        eps *= 1.25;
    }
}

pub fn random_directions(seed: u64, grid: &RadialGrid, count: usize) -> Vec<RadialFunction> {
    let mut r = rng(seed);
    (0..count).map(|_| random_direction(&mut r, grid)).collect()
}
