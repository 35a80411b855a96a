//! Batch front end for `henon-core`: every subcommand resolves an
//! [`ExperimentConfig`], runs one pipeline and writes a run directory with
//! `manifest.json`, `results.json` and plot-ready CSV tables.
//!
//! Exit codes: 0 success, 1 usage or IO error, 2 numerical non-convergence,
//! 3 invariant violation.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub mod commands;
pub mod config;
pub mod directions;
pub mod output;
pub mod pipeline;

pub use config::ExperimentConfig;
use output::{RunDir, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<henon_core::Error> for Failure {
    fn from(e: henon_core::Error) -> Self {
        use henon_core::Error as E;
        match e {
            E::NotConverged { .. } | E::StepUnderflow { .. } | E::Overflow { .. } | E::InsufficientExtent { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// What a subcommand produced. Tables and results are written even when
/// the run reports violations or non-convergence.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Value,
    pub tables: Vec<Table>,
    /// Invariant violations; any makes the exit code 3.
    pub violations: Vec<String>,
    /// Solves that did not converge; any makes the exit code 2.
    pub unconverged: Vec<String>,
}

impl Outcome {
    pub fn new(results: Value) -> Self {
        Self { results, ..Self::default() }
    }

    pub fn exit_code(&self) -> i32 {
        if !self.violations.is_empty() {
            3
        } else if !self.unconverged.is_empty() {
            2
        } else {
            0
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "henon",
    version,
    about = "Numerical experiments for the critical Hardy-Henon equation with a logarithmic term"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// First Dirichlet eigenvalue with Richardson extrapolation
    Eigen(Flags),
    /// Best weighted Sobolev constant and threshold energy
    Sobolev(Flags),
    /// Region label and margins of (lambda, mu)
    Classify(Flags),
    /// Local minimizer in the gradient-norm ball
    SolveMin(Flags),
    /// Mountain-pass solution
    SolveMp(Flags),
    /// Positive solutions by shooting over the center value
    Shoot(Flags),
    /// Nonexistence raster over (lambda, mu)
    Sweep(Flags),
    /// Bubble equation residual and best-constant drift
    VerifyBubbles(Flags),
    /// Small-epsilon rates of bubble integrals
    VerifyAsymptotics(Flags),
    /// Log-Sobolev, expansion and sphere-bound inequalities
    VerifyInequalities(Flags),
    /// Full existence pipeline with level verdicts
    Report(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long = "N", value_name = "N")]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    /// uniform or geometric
    #[arg(long)]
    grading: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// Run directory
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// File of key = value lines, overridden by flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value setting (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Flags {
    fn into_map(self) -> Result<BTreeMap<String, String>, Failure> {
        let mut map = match &self.config {
            Some(p) => config::read_config_file(p)?,
            None => BTreeMap::new(),
        };
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                return Err(Failure::Usage(format!("--set expects KEY=VALUE, got '{kv}'")));
            };
            config::insert_key(&mut map, k.trim(), v.trim())?;
        }
        let flags = [
            ("N", self.n),
            ("alpha", self.alpha),
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("nodes", self.nodes),
            ("grading", self.grading),
            ("rho", self.rho),
            ("eps", self.eps),
            ("tol", self.tol),
            ("out", self.out),
            ("seed", self.seed),
            ("workers", self.workers),
            ("q", self.q),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        }
        Ok(map)
    }
}

fn split(command: Command) -> (&'static str, Flags) {
    match command {
        Command::Eigen(f) => ("eigen", f),
        Command::Sobolev(f) => ("sobolev", f),
        Command::Classify(f) => ("classify", f),
        Command::SolveMin(f) => ("solve-min", f),
        Command::SolveMp(f) => ("solve-mp", f),
        Command::Shoot(f) => ("shoot", f),
        Command::Sweep(f) => ("sweep", f),
        Command::VerifyBubbles(f) => ("verify-bubbles", f),
        Command::VerifyAsymptotics(f) => ("verify-asymptotics", f),
        Command::VerifyInequalities(f) => ("verify-inequalities", f),
        Command::Report(f) => ("report", f),
    }
}

/// Parses `argv` (program name first) into a resolved configuration.
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentConfig, Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Failure::Usage(e.to_string()))?;
    let (name, flags) = split(cli.command);
    ExperimentConfig::resolve(name, &flags.into_map()?)
}

/// Runs the configured experiment and writes its run directory.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let outcome = commands::dispatch(cfg)?;
    let dir = RunDir::create(&cfg.out)?;
    dir.write_json("manifest.json", &json!({ "tool": "henon", "version": env!("CARGO_PKG_VERSION"), "config": cfg }))?;
    let results = json!({
        "subcommand": cfg.subcommand,
        "exit_code": outcome.exit_code(),
        "violations": outcome.violations,
        "unconverged": outcome.unconverged,
        "results": outcome.results,
    });
    dir.write_json("results.json", &results)?;
    for t in &outcome.tables {
        dir.write_table(t)?;
    }
    Ok(outcome)
}

/// Command-line entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (name, flags) = split(cli.command);
    let cfg = match flags.into_map().and_then(|m| ExperimentConfig::resolve(name, &m)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return e.code();
        }
    };
    match execute(&cfg) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.results).unwrap_or_default());
            for v in &outcome.violations {
                eprintln!("invariant violation: {v}");
            }
            for v in &outcome.unconverged {
                eprintln!("not converged: {v}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
