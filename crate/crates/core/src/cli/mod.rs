//! Command-line front end: `run`, `compare` and `validate`.
//!
//! Exit codes: 0 success, 2 configuration or I/O error, 3 solver
//! non-convergence, 4 kinematic singularity.

pub mod compare;
pub mod runner;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ObjectiveChoice, ScenarioConfig};
use crate::error::{Error, Result};

pub use compare::{compare, render_table, Comparison, ComparisonRow, MetricWinner};
pub use runner::{execute, write_artifacts, RunEntry, RunManifest, RunOutcome, RunStatus, RunSummary, Winners};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_KINEMATIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "strip-guidance", version, about = "Strip-imaging scan-rate optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the scenario with every selected method and write artifacts.
    Run(RunArgs),
    /// Compare the summaries of two or more runs of one scenario.
    Compare(CompareArgs),
    /// Check a scenario config without solving.
    Validate {
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario TOML file.
    pub config: PathBuf,
    /// all, linear, min-integral or min-max.
    #[arg(long)]
    pub objective: Option<ObjectiveChoice>,
    /// Add the line-rate-constrained minimum-integral run.
    #[arg(long)]
    pub constrained: bool,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Control interval override, s.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Iteration limit override.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Check the config and exit.
    #[arg(long)]
    pub validate_only: bool,
    /// Also write profiles.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Run directories holding summary.json.
    #[arg(required = true, num_args = 2..)]
    pub run_dirs: Vec<PathBuf>,
    /// Write the comparison as JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Validation(_) | Error::Io(_) => EXIT_CONFIG,
        Error::DegenerateGeometry(_) | Error::Singular(_) | Error::Impact { .. } => EXIT_KINEMATIC,
        Error::Divergence { .. } | Error::SweepFailure { .. } => EXIT_NOT_CONVERGED,
    }
}

/// Loads `path` and applies command-line overrides.
pub fn load_config(args: &RunArgs) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::load(&args.config)?;
    if let Some(o) = args.objective {
        config.run.objective = o;
    }
    if args.constrained {
        config.run.constrained = true;
    }
    if let Some(dt) = args.dt {
        config.time.dt = dt;
    }
    if let Some(n) = args.max_iters {
        config.solver.max_iters = n;
    }
    config.validate()?;
    Ok(config)
}

fn validate(path: &PathBuf) -> Result<i32> {
    let config = ScenarioConfig::load(path)?;
    let scenario = config.build()?;
    println!(
        "{}: valid ({} nodes, strip {:.3} km)",
        config.name,
        scenario.horizon.nodes(),
        scenario.arc_length() * scenario.earth.radius / 1e3
    );
    Ok(EXIT_OK)
}

fn run(args: &RunArgs) -> Result<i32> {
    let config = load_config(args)?;
    let scenario = config.build()?;
    if args.validate_only {
        println!("{}: valid", config.name);
        return Ok(EXIT_OK);
    }
    let outcome = execute(&config, &scenario, &args.out.display().to_string());
    write_artifacts(&outcome, &args.out, args.svg)?;
    for entry in &outcome.summary.runs {
        match (&entry.metrics, &entry.error) {
            (Some(m), _) => println!(
                "{:<26} {:?}: int |w|^2 = {:.9} deg^2/s, max |w| = {:.9} deg/s, |s_f err| = {:.2e} rad{}",
                entry.label,
                entry.status,
                m.integral_rate_sq,
                m.max_rate,
                m.terminal_error,
                match entry.bounds_satisfied {
                    Some(true) => ", f_CCD bounds met",
                    Some(false) => ", f_CCD bounds violated",
                    None => "",
                }
            ),
            (None, Some(e)) => eprintln!("{:<26} failed: {e}", entry.label),
            _ => {}
        }
    }
    if let Some(e) = outcome.first_error() {
        return Ok(exit_code(e));
    }
    Ok(if outcome.all_converged() { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn compare_cmd(args: &CompareArgs) -> Result<i32> {
    let c = compare(&args.run_dirs)?;
    print!("{}", render_table(&c));
    if let Some(path) = &args.out {
        let mut text = serde_json::to_string_pretty(&c).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(EXIT_OK)
}

/// Runs a parsed command and returns the process exit code.
pub fn dispatch(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare_cmd(args),
        Command::Validate { config } => validate(config),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}
