//! Resolved experiment configuration: defaults, then `key = value` lines from
//! a config file, then `--set` pairs, then flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use henon_core::Grading;
use serde::Serialize;

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: String,
    #[serde(rename = "N")]
    pub dim: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub nodes: usize,
    pub grading: Grading,
    /// Ball radius for `solve-min`; the mountain-pass radius when absent.
    pub rho: Option<f64>,
    /// Largest bubble parameter used by the bubble checks.
    pub eps: f64,
    /// Residual tolerance of the solvers.
    pub tol: f64,
    pub out: String,
    pub seed: u64,
    /// Worker threads for `sweep`; 0 picks the available parallelism.
    pub workers: usize,
    pub q: Option<f64>,
    pub path_nodes: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub per_decade: usize,
    pub raster: usize,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub mu_min: f64,
    pub mu_max: f64,
    pub samples: usize,
    pub directions: usize,
    pub decades: usize,
    pub rho_cut: f64,
    pub l1: f64,
    pub l2: f64,
    pub weighted: bool,
}

pub const KEYS: &[&str] = &[
    "N",
    "alpha",
    "lambda",
    "mu",
    "nodes",
    "grading",
    "rho",
    "eps",
    "tol",
    "out",
    "seed",
    "workers",
    "q",
    "path_nodes",
    "d_min",
    "d_max",
    "per_decade",
    "raster",
    "lambda_min",
    "lambda_max",
    "mu_min",
    "mu_max",
    "samples",
    "directions",
    "decades",
    "rho_cut",
    "l1",
    "l2",
    "weighted",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Usage(format!("config line {}: expected key = value", i + 1)));
        };
        insert_key(&mut map, k.trim(), v.trim())?;
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn insert_key(map: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<(), Failure> {
    if !KEYS.contains(&key) {
        return Err(Failure::Usage(format!("unknown config key '{key}'")));
    }
    map.insert(key.to_string(), value.to_string());
    Ok(())
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, Failure> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| Failure::Usage(format!("invalid value '{v}' for {key}"))),
    }
}

fn get_opt<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, Failure> {
    match map.get(key).map(|v| v.as_str()) {
        None | Some("none") => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| Failure::Usage(format!("invalid value '{v}' for {key}"))),
    }
}

fn parse_grading(v: &str) -> Result<Grading, Failure> {
    match v {
        "uniform" => Ok(Grading::Uniform),
        "geometric" => Ok(Grading::Geometric),
        _ => Err(Failure::Usage(format!("grading must be uniform or geometric, got '{v}'"))),
    }
}

impl ExperimentConfig {
    pub fn resolve(subcommand: &str, map: &BTreeMap<String, String>) -> Result<Self, Failure> {
        let (nodes, grading) = match subcommand {
            "eigen" => (4096, Grading::Uniform),
            "classify" => (2048, Grading::Uniform),
            "verify-inequalities" => (1024, Grading::Geometric),
            _ => (2048, Grading::Geometric),
        };
        let grading = match map.get("grading") {
            Some(v) => parse_grading(v)?,
            None => grading,
        };
        let cfg = Self {
            subcommand: subcommand.to_string(),
            dim: get(map, "N", 3)?,
            alpha: get(map, "alpha", 0.0)?,
            lambda: get(map, "lambda", 0.0)?,
            mu: get(map, "mu", 0.0)?,
            nodes: get(map, "nodes", nodes)?,
            grading,
            rho: get_opt(map, "rho")?,
            eps: get(map, "eps", 0.1)?,
            tol: get(map, "tol", 1e-8)?,
            out: get(map, "out", format!("henon-runs/{subcommand}"))?,
            seed: get(map, "seed", 0)?,
            workers: get(map, "workers", 0)?,
            q: get_opt(map, "q")?,
            path_nodes: get(map, "path_nodes", 64)?,
            d_min: get(map, "d_min", 1e-8)?,
            d_max: get(map, "d_max", 1e8)?,
            per_decade: get(map, "per_decade", 8)?,
            raster: get(map, "raster", 4)?,
            lambda_min: get_opt(map, "lambda_min")?,
            lambda_max: get_opt(map, "lambda_max")?,
            mu_min: get(map, "mu_min", -6.0)?,
            mu_max: get(map, "mu_max", -0.05)?,
            samples: get(map, "samples", 100)?,
            directions: get(map, "directions", 200)?,
            decades: get(map, "decades", 3)?,
            rho_cut: get(map, "rho_cut", 0.5)?,
            l1: get(map, "l1", 0.1)?,
            l2: get(map, "l2", 1.0)?,
            weighted: get(map, "weighted", true)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let bad = |m: &str| Err(Failure::Usage(m.to_string()));
        if self.dim < 3 {
            return bad("--N must be at least 3");
        }
        if !(self.alpha > -2.0) || !self.alpha.is_finite() {
            return bad("--alpha must be finite and greater than -2");
        }
        if !self.lambda.is_finite() || !self.mu.is_finite() {
            return bad("--lambda and --mu must be finite");
        }
        if self.nodes < 8 {
            return bad("--nodes must be at least 8");
        }
        if !(self.tol > 0.0) || !(self.eps > 0.0) {
            return bad("--tol and --eps must be positive");
        }
        if self.rho.is_some_and(|r| !(r > 0.0)) {
            return bad("--rho must be positive");
        }
        if !(self.d_min > 0.0 && self.d_max > self.d_min && self.d_max.is_finite()) {
            return bad("need 0 < d_min < d_max");
        }
        if self.raster == 0 || self.per_decade == 0 || self.samples == 0 || self.directions == 0 {
            return bad("raster, per_decade, samples and directions must be positive");
        }
        if self.path_nodes < 3 {
            return bad("path_nodes must be at least 3");
        }
        if !(self.l1 > 0.0 && self.l2 >= self.l1) {
            return bad("need 0 < l1 <= l2");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override() {
        let mut m = parse_config_text("# comment\nN = 4\nmu=1.5 # trailing\n\n").unwrap();
        insert_key(&mut m, "mu", "2").unwrap();
        let c = ExperimentConfig::resolve("solve-mp", &m).unwrap();
        assert_eq!(c.dim, 4);
        assert_eq!(c.mu, 2.0);
        assert_eq!(c.grading, Grading::Geometric);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config_text("nonsense").is_err());
        assert!(parse_config_text("colour = red").is_err());
        let m = parse_config_text("alpha = -2.5").unwrap();
        assert!(ExperimentConfig::resolve("classify", &m).is_err());
        let m = parse_config_text("grading = spiral").unwrap();
        assert!(ExperimentConfig::resolve("eigen", &m).is_err());
    }
}
