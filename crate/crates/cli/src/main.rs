//! `rydcav`: configuration-driven runner for the cavity superradiance
//! experiments.
//!
//! Exit codes: 0 success, 2 configuration or output-path error, 3 solver
//! failure. Errors are reported as one JSON object on stderr.

mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Config, Experiment, Format, Issue};

#[derive(Parser)]
#[command(name = "rydcav", version, about = "Rydberg-array cavity superradiance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory, overriding `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for independent grid points (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Table format, overriding `format` in the config.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Print the fully resolved config without running anything.
    Validate { config: PathBuf },
    /// List the available experiments.
    ListExperiments,
}

enum Failure {
    Config(Vec<Issue>),
    Output(String),
    Solver { message: String, details: Vec<String> },
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Output(_) => 2,
            Failure::Solver { .. } => 3,
        }
    }

    fn report(&self) -> serde_json::Value {
        match self {
            Failure::Config(issues) => json!({
                "status": "error",
                "kind": "config",
                "message": issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "),
                "issues": issues,
            }),
            Failure::Output(message) => json!({
                "status": "error",
                "kind": "output",
                "message": message,
            }),
            Failure::Solver { message, details } => json!({
                "status": "error",
                "kind": "solver",
                "message": message,
                "details": details,
            }),
        }
    }
}

fn config_error(message: String) -> Failure {
    Failure::Config(vec![Issue { message, line: None }])
}

fn load(path: &Path, cli: &Cli) -> Result<Config, Failure> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let mut config = Config::load(&source).map_err(Failure::Config)?;
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.clone());
    }
    if let Some(f) = cli.format {
        config.format = Some(f);
    }
    Ok(config)
}

fn run(path: &Path, cli: &Cli) -> Result<(), Failure> {
    let config = load(path, cli)?;
    let start = Instant::now();
    let outcome = experiments::run(&config).map_err(|e| Failure::Solver {
        message: e.to_string(),
        details: Vec::new(),
    })?;
    let wall = start.elapsed().as_secs_f64();
    let dir = config.output_dir.clone().unwrap();
    let files = output::write_all(&dir, config.format.unwrap(), &config, &outcome.tables, &outcome.reports, wall)
        .map_err(|e| Failure::Output(format!("cannot write to {}: {e}", dir.display())))?;

    let stats = &outcome.stats;
    let limit = config.solver.max_failure_fraction.unwrap();
    if stats.failure_fraction() > limit {
        return Err(Failure::Solver {
            message: format!(
                "{} of {} solves failed ({:.2}%), above the allowed {:.2}%; partial results were written",
                stats.failures,
                stats.solves,
                100.0 * stats.failure_fraction(),
                100.0 * limit
            ),
            details: stats.notes.clone(),
        });
    }
    let summary = json!({
        "status": "ok",
        "experiment": config.experiment.name(),
        "files": files,
        "solves": stats.solves,
        "failures": stats.failures,
        "notes": stats.notes,
        "wall_time_s": wall,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(config_error("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| config_error(format!("cannot start {k} threads: {e}")))?;
    }
    match &cli.command {
        Command::Run { config } => run(config, cli),
        Command::Validate { config } => {
            let c = load(config, cli)?;
            print!("{}", c.to_toml());
            Ok(())
        }
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<8} {}", e.name(), e.summary());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.report());
            ExitCode::from(f.exit_code())
        }
    }
}
