//! Command-line front end for the `levelset` library.
//!
//! Each subcommand reads an [`ExperimentConfig`] and writes its results
//! under the output directory. Exit codes: 0 success, 1 unexpected result,
//! 2 configuration error, 3 runtime error.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use levelset::adversary::{
    run_indistinguishability, shipped_algorithms, AdversaryOptions, Verdict,
};
use levelset::engine::{run_ba, OutputSet};
use levelset::error::{AdversaryError, VerificationError};
use levelset::geometry::{greedy_packing, Point};
use levelset::protocol::LevelSetEstimate;
use levelset::verification::{
    check_eps_approximation, estimate_nls_dimension, geometric_sequence, sweep_sample_complexity,
    CheckOptions,
};
use thiserror::Error;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "levelset",
    version,
    about = "Level set approximation of black-box functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the bisect-and-approximate engine once
    Run(CommonArgs),
    /// Measure sample complexity over a geometric range of accuracies
    Sweep(CommonArgs),
    /// Check an output-set file against the configured function
    Verify(CommonArgs),
    /// Run the lower-bound harness against the shipped algorithms
    Adversary(CommonArgs),
    /// Estimate the near-level-set dimension
    Nls(CommonArgs),
    /// Greedy sup-norm packing of a points file
    Pack(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Verification grid points per axis (overrides `grid_n`)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Seed for verification sampling (overrides `seed`)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the resolved config and exit
    #[arg(long)]
    pub dry_run: bool,
}

/// Whether a command's result was the expected one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Expected,
    Unexpected,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Expected => 0,
            Outcome::Unexpected => 1,
        }
    }
}

fn load(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(g) = args.grid {
        config.grid_n = g;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    // relative input paths are taken relative to the config file
    let base = args.config.parent().unwrap_or(Path::new("."));
    if let Some(v) = config.verify.as_mut() {
        v.output_set = base.join(&v.output_set);
    }
    if let Some(p) = config.pack.as_mut() {
        p.points = base.join(&p.points);
    }
    config.validate()?;
    Ok(config)
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn check_options(config: &ExperimentConfig) -> Result<CheckOptions, CliError> {
    Ok(CheckOptions {
        mode: config.mode()?,
        ..CheckOptions::default()
            .with_grid(config.grid_n)
            .with_seed(config.seed)
    })
}

type CommandFn = fn(&ExperimentConfig, &Path, &mut dyn Write) -> Result<Outcome, CliError>;

/// Runs a parsed command line, writing human-readable output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let (args, command): (&CommonArgs, CommandFn) = match &cli.command {
        Command::Run(a) => (a, cmd_run),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Verify(a) => (a, cmd_verify),
        Command::Adversary(a) => (a, cmd_adversary),
        Command::Nls(a) => (a, cmd_nls),
        Command::Pack(a) => (a, cmd_pack),
    };
    let config = load(args)?;
    if args.dry_run {
        write!(out, "{}", config.to_toml()).map_err(runtime)?;
        return Ok(Outcome::Expected);
    }
    command(&config, &args.out, out)
}

pub fn cmd_run(
    config: &ExperimentConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let oracle = config.oracle()?;
    let strategy = config.strategy(oracle.dim())?;
    let ba = config.ba_config(&*strategy, oracle.dim())?;
    config.stop()?;
    let trace = run_ba(&ba, &oracle, &*strategy).map_err(runtime)?;
    let published = trace.published_output_set();
    write_output(dir, "trace.csv", &trace.to_csv())?;
    write_output(dir, "output_set.txt", &published.to_text())?;
    writeln!(
        out,
        "iterations: {}\nqueries: {}\ncubes: {}\nstatus: {:?}",
        trace.completed_iterations(),
        trace.total_queries(),
        published.len(),
        trace.status
    )
    .map_err(runtime)?;
    Ok(Outcome::Expected)
}

pub fn cmd_sweep(
    config: &ExperimentConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] table".into()))?;
    let oracle = config.oracle()?;
    let strategy = config.strategy(oracle.dim())?;
    let ba = config.ba_config(&*strategy, oracle.dim())?;
    let epsilons = geometric_sequence(spec.start, spec.factor, spec.count);
    let result = sweep_sample_complexity(
        &ba,
        &oracle,
        &*strategy,
        &epsilons,
        spec.extra_depth,
        &check_options(config)?,
    )
    .map_err(runtime)?;
    write_output(dir, "sweep.csv", &result.to_csv())?;
    match &result.fit {
        Some(fit) => writeln!(
            out,
            "slope: {:.4}\nr_squared: {:.4}",
            fit.slope, fit.r_squared
        ),
        None => writeln!(out, "slope: unavailable (fewer than 3 accuracies reached)"),
    }
    .map_err(runtime)?;
    let all_passed = result.rows.iter().all(|r| r.passed);
    Ok(if all_passed && result.fit.is_some() {
        Outcome::Expected
    } else {
        Outcome::Unexpected
    })
}

pub fn cmd_verify(
    config: &ExperimentConfig,
    _dir: &Path,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let spec = config
        .verify
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [verify] table".into()))?;
    let text = fs::read_to_string(&spec.output_set)
        .map_err(|e| CliError::Config(format!("{}: {e}", spec.output_set.display())))?;
    let set = OutputSet::from_text(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", spec.output_set.display())))?;
    let oracle = config.oracle()?;
    if set.dim() != oracle.dim() {
        return Err(CliError::Config(format!(
            "output set has dimension {}, function has {}",
            set.dim(),
            oracle.dim()
        )));
    }
    let verdict = check_eps_approximation(
        &set,
        &oracle,
        config.level,
        spec.epsilon,
        &check_options(config)?,
    )
    .map_err(|e| match e {
        VerificationError::NoLevelSetSampler | VerificationError::DegenerateInput(_) => {
            CliError::Config(e.to_string())
        }
        e => runtime(e),
    })?;
    writeln!(
        out,
        "passed: {}\ncontainment_failures: {}\nexcess_failures: {}\ngrid_resolution: {}",
        verdict.passed,
        verdict.containment_failures.len(),
        verdict.excess_failures.len(),
        verdict.grid_resolution
    )
    .map_err(runtime)?;
    for (x, v) in verdict.excess_failures.iter().take(5) {
        writeln!(out, "excess_example: {} f={v}", fmt_point(x)).map_err(runtime)?;
    }
    Ok(if verdict.passed {
        Outcome::Expected
    } else {
        Outcome::Unexpected
    })
}

fn fmt_point(x: &[f64]) -> String {
    x.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cmd_adversary(
    config: &ExperimentConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let spec = config
        .adversary
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [adversary] table".into()))?;
    let class = config.adversary_class(spec)?;
    let dim = config.function.dim.unwrap_or(1);
    let algorithms: Vec<_> = shipped_algorithms(dim, class)
        .into_iter()
        .filter(|a| spec.algorithm == "all" || a.name == spec.algorithm)
        .collect();
    if algorithms.is_empty() {
        return Err(CliError::Config(format!(
            "unknown algorithm {:?}",
            spec.algorithm
        )));
    }
    let options = AdversaryOptions {
        budget: spec.budget,
        eta: spec.eta,
        dense_grid: None,
    };
    let mut text = String::new();
    let mut expected = true;
    for alg in &algorithms {
        let report =
            run_indistinguishability(alg, spec.epsilon, class, &options).map_err(|e| match e {
                AdversaryError::AccuracyTooLarge { .. } | AdversaryError::InvalidParameter(_) => {
                    CliError::Config(e.to_string())
                }
                e => runtime(e),
            })?;
        expected &= match &report.verdict {
            Verdict::AlgorithmDefeated(w) => w.validated,
            Verdict::BudgetSufficient => report.budget as u64 >= report.grid_size,
        };
        text.push_str(&report.to_string());
        text.push('\n');
    }
    write_output(dir, "adversary.txt", &text)?;
    write!(out, "{text}").map_err(runtime)?;
    Ok(if expected {
        Outcome::Expected
    } else {
        Outcome::Unexpected
    })
}

pub fn cmd_nls(
    config: &ExperimentConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let spec = config
        .nls
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [nls] table".into()))?;
    let oracle = config.oracle()?;
    let scales = geometric_sequence(spec.start, spec.factor, spec.count);
    let estimate = estimate_nls_dimension(&oracle, config.level, &scales, config.grid_n).map_err(
        |e| match e {
            VerificationError::DegenerateInput(_) => CliError::Config(e.to_string()),
            e => runtime(e),
        },
    )?;
    write_output(dir, "nls.csv", &estimate.to_csv())?;
    writeln!(
        out,
        "slope: {:.4}\nr_squared: {:.4}",
        estimate.fit.slope, estimate.fit.r_squared
    )
    .map_err(runtime)?;
    Ok(Outcome::Expected)
}

/// Points file: one point per line, coordinates separated by commas or
/// whitespace; blank lines and `#` comments are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Point>, String> {
    let mut points: Vec<Point> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<Result<Point, _>>()
            .map_err(|e| format!("line {}: {e}", n + 1))?;
        if let Some(first) = points.first() {
            if first.len() != p.len() {
                return Err(format!(
                    "line {}: expected {} coordinates",
                    n + 1,
                    first.len()
                ));
            }
        }
        points.push(p);
    }
    Ok(points)
}

pub fn cmd_pack(
    config: &ExperimentConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let spec = config
        .pack
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [pack] table".into()))?;
    let text = fs::read_to_string(&spec.points)
        .map_err(|e| CliError::Config(format!("{}: {e}", spec.points.display())))?;
    let points = parse_points(&text).map_err(CliError::Config)?;
    let packing = greedy_packing(&points, spec.r);
    let mut csv = String::new();
    for w in &packing.witnesses {
        csv.push_str(&fmt_point(w));
        csv.push('\n');
    }
    write_output(dir, "packing.txt", &csv)?;
    writeln!(
        out,
        "points: {}\nscale: {}\npacking_count: {}",
        points.len(),
        spec.r,
        packing.count
    )
    .map_err(runtime)?;
    Ok(Outcome::Expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parsing() {
        let pts = parse_points("# header\n0.1, 0.2\n0.3 0.4\n\n").unwrap();
        assert_eq!(pts, vec![vec![0.1, 0.2], vec![0.3, 0.4]]);
        assert!(parse_points("0.1,0.2\n0.3\n").is_err());
        assert!(parse_points("0.1,x\n").is_err());
    }
}
