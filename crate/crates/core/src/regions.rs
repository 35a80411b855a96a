//! Parameter regions for (λ, μ), the mountain-pass constants and the
//! nonexistence margin.
//!
//! λ₁ and S_α are always passed in, so a stored pair reproduces every label.

use crate::error::{Error, Result};
use crate::functional::ProblemParams;
use crate::math;

/// Margins closer to zero than this decide nothing.
pub const MARGIN_DEAD_ZONE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RegionLabel {
    A0,
    B0,
    C0,
    #[cfg_attr(feature = "serde", serde(rename = "B0_and_C0"))]
    B0AndC0,
    #[cfg_attr(feature = "serde", serde(rename = "NONEXISTENCE"))]
    Nonexistence,
    #[cfg_attr(feature = "serde", serde(rename = "UNCLASSIFIED"))]
    Unclassified,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::A0 => "A0",
            RegionLabel::B0 => "B0",
            RegionLabel::C0 => "C0",
            RegionLabel::B0AndC0 => "B0_and_C0",
            RegionLabel::Nonexistence => "NONEXISTENCE",
            RegionLabel::Unclassified => "UNCLASSIFIED",
        }
    }
}

/// Margins of the membership inequalities; `None` where an inequality does
/// not apply to the given parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Margins {
    #[cfg_attr(feature = "serde", serde(rename = "B0"))]
    pub b0: Option<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "C0"))]
    pub c0: Option<f64>,
    pub nonexistence: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub label: RegionLabel,
    pub margins: Margins,
}

/// E_th = (α+2)/(2(N+α)) S_α^{(N+α)/(α+2)}.
pub fn threshold_energy(alpha: f64, dim: usize, s_alpha: f64) -> f64 {
    let n = dim as f64;
    (alpha + 2.0) / (2.0 * (n + alpha)) * math::powf(s_alpha, (n + alpha) / (alpha + 2.0))
}

/// B₀ expression; defined for μ < 0 and λ ∈ [0, λ₁).
pub fn b0_margin(params: &ProblemParams, lambda1: f64, s_alpha: f64) -> Option<f64> {
    let ProblemParams { alpha, lambda, mu, .. } = *params;
    if !(mu < 0.0 && lambda >= 0.0 && lambda < lambda1) {
        return None;
    }
    let n = params.dim as f64;
    let ratio = (lambda1 - lambda) / lambda1;
    let e = (n + alpha) / (alpha + 2.0);
    Some(
        (alpha + 2.0) / (2.0 * (n + alpha)) * math::powf(ratio, e) * math::powf(s_alpha, e)
            + 0.5 * mu * params.ball_volume(),
    )
}

/// C₀ expression; defined for μ < 0.
pub fn c0_margin(params: &ProblemParams, s_alpha: f64) -> Option<f64> {
    let ProblemParams { alpha, lambda, mu, dim, .. } = *params;
    if !(mu < 0.0) {
        return None;
    }
    Some(threshold_energy(alpha, dim, s_alpha) + 0.5 * mu * math::exp(-lambda / mu) * params.ball_volume())
}

fn check_nonexistence_domain(params: &ProblemParams) -> Result<()> {
    if !(params.mu < 0.0) {
        return Err(Error::OutsideRegion("nonexistence margin needs mu < 0"));
    }
    if params.alpha > 0.0 {
        return Err(Error::OutsideRegion("nonexistence margin needs alpha <= 0"));
    }
    Ok(())
}

/// m − m log m + λ − λ₁ with m = −(N−2)μ/(α+2).
pub fn nonexistence_margin(params: &ProblemParams, lambda1: f64) -> Result<f64> {
    check_nonexistence_domain(params)?;
    let m = critical_point_scale(params);
    Ok(m - m * math::ln(m) + params.lambda - lambda1)
}

fn critical_point_scale(params: &ProblemParams) -> f64 {
    -(params.dim as f64 - 2.0) * params.mu / (params.alpha + 2.0)
}

/// f(s) = s^{2*_α−2} + λ − λ₁ + μ log s².
pub fn scalar_profile(params: &ProblemParams, lambda1: f64, s: f64) -> f64 {
    math::powf(s, params.critical_exponent() - 2.0) + params.lambda - lambda1 + params.mu * 2.0 * math::ln(s)
}

/// The unique minimizer s₀ = m^{(N−2)/(2(α+2))} of [`scalar_profile`].
pub fn scalar_minimizer(params: &ProblemParams) -> Result<f64> {
    check_nonexistence_domain(params)?;
    let n = params.dim as f64;
    Ok(math::powf(critical_point_scale(params), (n - 2.0) / (2.0 * (params.alpha + 2.0))))
}

fn decided(m: Option<f64>) -> (bool, bool) {
    match m {
        Some(v) if v > MARGIN_DEAD_ZONE => (true, false),
        Some(v) if v.abs() <= MARGIN_DEAD_ZONE => (false, true),
        _ => (false, false),
    }
}

pub fn classify(params: &ProblemParams, lambda1: f64, s_alpha: f64) -> Classification {
    let b0 = b0_margin(params, lambda1, s_alpha);
    let c0 = c0_margin(params, s_alpha);
    let nonexistence = nonexistence_margin(params, lambda1).ok();
    let margins = Margins { b0, c0, nonexistence };
    let label = if params.mu > 0.0 {
        RegionLabel::A0
    } else {
        let (in_b, amb_b) = decided(b0);
        let (in_c, amb_c) = decided(c0);
        let non = nonexistence.is_some_and(|v| v > MARGIN_DEAD_ZONE);
        match (in_b, in_c) {
            (true, true) => RegionLabel::B0AndC0,
            (true, false) => RegionLabel::B0,
            (false, true) => RegionLabel::C0,
            _ if non && !amb_b && !amb_c => RegionLabel::Nonexistence,
            _ => RegionLabel::Unclassified,
        }
    };
    Classification { label, margins }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GeometryCase {
    B0,
    C0,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MpGeometry {
    pub rho_mp: f64,
    pub sigma: f64,
    pub case: GeometryCase,
}

/// Sphere radius ρ and level σ with `I ≥ σ` on `‖∇u‖ = ρ`. When both cases
/// apply the one with the larger σ is returned.
pub fn mp_geometry_constants(params: &ProblemParams, lambda1: f64, s_alpha: f64) -> Result<MpGeometry> {
    let n = params.dim as f64;
    let a = params.alpha;
    let half = (n + a) / (2.0 * (a + 2.0));
    let b = decided(b0_margin(params, lambda1, s_alpha)).0.then(|| {
        let ratio = (lambda1 - params.lambda) / lambda1;
        MpGeometry {
            rho_mp: math::powf(ratio, (n - 2.0) / (2.0 * (a + 2.0))) * math::powf(s_alpha, half),
            sigma: b0_margin(params, lambda1, s_alpha).unwrap(),
            case: GeometryCase::B0,
        }
    });
    let c = decided(c0_margin(params, s_alpha)).0.then(|| MpGeometry {
        rho_mp: math::powf(s_alpha, half),
        sigma: c0_margin(params, s_alpha).unwrap(),
        case: GeometryCase::C0,
    });
    match (b, c) {
        (Some(x), Some(y)) => Ok(if y.sigma > x.sigma { y } else { x }),
        (Some(x), None) | (None, Some(x)) => Ok(x),
        (None, None) => Err(Error::OutsideRegion("mountain-pass constants need (lambda, mu) in B0 or C0")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{E, PI};

    const S3: f64 = 5.47790408953133;

    fn p(lambda: f64, mu: f64) -> ProblemParams {
        ProblemParams::new(3, 0.0, lambda, mu).unwrap()
    }

    #[test]
    fn positive_mu_is_a0() {
        for l in [-100.0, 0.0, 50.0] {
            assert_eq!(classify(&p(l, 1.0), PI * PI, S3).label, RegionLabel::A0);
        }
    }

    #[test]
    fn tiny_negative_mu_is_in_b0() {
        let c = classify(&p(0.0, -1e-6), PI * PI, S3);
        assert!(c.margins.b0.unwrap() > 0.0);
        assert_eq!(c.label, RegionLabel::B0AndC0);
    }

    #[test]
    fn unit_scale_margin() {
        let l1 = PI * PI;
        let c = classify(&p(l1, -2.0), l1, S3);
        assert!((c.margins.nonexistence.unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(c.label, RegionLabel::Nonexistence);
        let m = nonexistence_margin(&p(3.0, -2.0 * E), l1).unwrap();
        assert!((m - (3.0 - l1)).abs() < 1e-13);
    }

    #[test]
    fn nonexistence_domain() {
        assert!(nonexistence_margin(&p(0.0, 1.0), 1.0).is_err());
        let q = ProblemParams::new(3, 0.5, 0.0, -1.0).unwrap();
        assert!(nonexistence_margin(&q, 1.0).is_err());
    }

    #[test]
    fn threshold_at_zero_alpha() {
        let e = threshold_energy(0.0, 4, 10.0);
        assert!((e - 100.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn dead_zone_is_unclassified() {
        let l1 = PI * PI;
        let mut q = p(0.0, -2.0);
        q.lambda = l1 - 1.0;
        let m = nonexistence_margin(&q, l1).unwrap();
        q.lambda -= m;
        let c = classify(&q, l1, S3);
        assert!(c.margins.nonexistence.unwrap().abs() <= MARGIN_DEAD_ZONE);
        assert_eq!(c.label, RegionLabel::Unclassified);
    }

    #[test]
    fn geometry_outside_regions_is_rejected() {
        assert!(mp_geometry_constants(&p(0.0, 1.0), PI * PI, S3).is_err());
        let g = mp_geometry_constants(&p(0.0, -1e-9), PI * PI, S3).unwrap();
        assert!((g.rho_mp - math::powf(S3, 0.75)).abs() < 1e-12);
    }
}
