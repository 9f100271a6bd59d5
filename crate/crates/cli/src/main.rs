mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::{
    BacktestArgs, CapabilityArgs, FitArgs, ForecastArgs, FrontierArgs, NormalizeArgs, ThresholdArgs,
};

/// Forecast frontier benchmark scores from release date or training compute.
#[derive(Debug, Parser)]
#[command(name = "capcast", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dataset file (CSV or JSON).
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Bundled dataset: `agentic` or `leaderboard`.
    #[arg(long, global = true)]
    pub fixture: Option<String>,
    /// Dataset format (`csv` or `json`); inferred from the extension by default.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Benchmark ceiling, `NAME=VALUE`. Repeatable.
    #[arg(long = "ceiling", global = true, value_parser = parse_ceiling)]
    pub ceilings: Vec<(String, f64)>,
    /// Directory for JSON and CSV outputs.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Output formats, comma separated (`json`, `csv`).
    #[arg(long, global = true, value_delimiter = ',')]
    pub formats: Vec<String>,
}

fn parse_ceiling(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: f64 = value
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    Ok((name.to_string(), value))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fill scaled training FLOP from parameter and token counts.
    Normalize(NormalizeArgs),
    /// Compute a capability metric column (PC-1 or Elo).
    Capability(CapabilityArgs),
    /// List the frontier models of an (x, y) plane.
    Frontier(FrontierArgs),
    /// Fit one forecasting pathway and print its parameters.
    Fit(FitArgs),
    /// Expanding-window backtest of capability metrics or whole pathways.
    Backtest(BacktestArgs),
    /// Forecast scores over a horizon, optionally with bootstrap bands.
    Forecast(ForecastArgs),
    /// Distribution of the date or compute at which a score is reached.
    Threshold(ThresholdArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Normalize(a) => commands::normalize(g, a),
        Command::Capability(a) => commands::capability(g, a),
        Command::Frontier(a) => commands::frontier(g, a),
        Command::Fit(a) => commands::fit(g, a),
        Command::Backtest(a) => commands::backtest(g, a),
        Command::Forecast(a) => commands::forecast(g, a),
        Command::Threshold(a) => commands::threshold(g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("capcast: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
