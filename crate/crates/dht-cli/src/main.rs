//! Batch front end for the trade-off computations and Monte-Carlo runs in
//! `dht-core`: each subcommand reads a JSON parameter document (file plus
//! `--param` overrides), runs one computation, and writes a single CSV or
//! JSON artifact atomically with the tool version, config hash, and seed
//! embedded.

mod commands;
mod emit;
mod params;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "dht", version, about = "rate / error-exponent / distortion trade-off tool")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON parameter document; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// KEY=VALUE parameter override (repeatable; VALUE parsed as JSON)
    #[arg(long = "param", global = true)]
    params: Vec<String>,
    /// output artifact path (default: <command>.csv or .json)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// master random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// grid resolution of the swept axis
    #[arg(long = "grid-step", global = true)]
    grid_step: Option<f64>,
    /// decimal places in CSV output
    #[arg(long, global = true)]
    precision: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// minimum-distortion curves over an exponent grid, one per rate
    Fig2,
    /// exponent curves of the detection schemes over the strategy noise
    Fig3,
    /// evaluate a single point of the achievable region
    TaiPoint,
    /// heuristic Pareto frontier search toward (rate, exponent) probes
    TaiFrontier,
    /// binary rate-distortion curve with decoder side information
    Wz,
    /// minimize KL divergence over a marginal-constrained coupling set
    Iproject,
    /// best achievable exponents per scheme at one rate
    Exponent,
    /// Monte-Carlo simulation of a coding scheme
    Simulate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::TaiPoint => "tai-point",
            Command::TaiFrontier => "tai-frontier",
            Command::Wz => "wz",
            Command::Iproject => "iproject",
            Command::Exponent => "exponent",
            Command::Simulate => "simulate",
        }
    }
}

/// Error category, mapped onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Infeasible(String),
    Budget(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Numerical(_) => 5,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Infeasible(m)
            | CliError::Budget(m)
            | CliError::Numerical(m)
            | CliError::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = params::RunConfig::resolve(
        cli.command.name(),
        cli.config.as_deref(),
        &cli.params,
        cli.out,
        cli.seed,
        cli.grid_step,
        cli.precision,
    );
    let result = run.and_then(|cfg| commands::run(cli.command.name(), &cfg));
    match result {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
