use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use signtree_core::factors::FactorModel;
use signtree_core::strategies::ModelKind;

mod commands;
mod config;

/// Decision-tree sign forecasting strategies and their bootstrap significance.
#[derive(Debug, Parser)]
#[command(name = "signtree", version, args_override_self = true)]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// JSON file with default options (see README).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo study of mean p-values on simulated processes.
    Simulate(SimulateArgs),
    /// Run the strategy universe on a return series.
    Backtest(BacktestArgs),
    /// Bootstrap p-values of a backtested universe.
    Significance(SignificanceArgs),
    /// Factor-model regressions of a strategy's monthly returns.
    Factors(FactorsArgs),
    /// Look-ahead bias of the previous-sign strategy.
    BiasDemo(BiasArgs),
    /// Calibrate the bootstrap block size on an AR null.
    SelectBlocksize(BlockArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DgpKind {
    /// AR(2) with both coefficients equal to the parameter.
    Ar2,
    /// Two-lag Markov sign process with both deltas equal to the parameter.
    Markov2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sweep {
    Param,
    Periods,
    Window,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "ar2")]
    dgp: DgpKind,
    /// What the listed values vary.
    #[arg(long, value_enum, default_value = "param")]
    sweep: Sweep,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2, 0.3, 0.4])]
    values: Vec<f64>,
    /// Process parameter when sweeping periods or window.
    #[arg(long, default_value_t = 0.2)]
    param: f64,
    /// Forecast periods T.
    #[arg(long, default_value_t = 500)]
    periods: usize,
    /// Calibration window L.
    #[arg(long, default_value_t = 50)]
    window: usize,
    #[arg(long, default_value_t = 2)]
    lag: usize,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', value_parser = parse_model)]
    models: Vec<ModelKind>,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 200)]
    resamples: usize,
    #[arg(long, default_value_t = 5)]
    block_size: usize,
    /// Also write `returns.csv` holding this many simulated returns at the
    /// first sweep value.
    #[arg(long)]
    emit_returns: Option<usize>,
    /// Return volatility of the emitted series; the study itself is scale-free.
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', value_parser = parse_model)]
    models: Vec<ModelKind>,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
    lags: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    window_start: usize,
    #[arg(long, default_value_t = 500)]
    window_stop: usize,
    #[arg(long, default_value_t = 10)]
    window_step: usize,
    /// Accept lags and windows outside the default grid.
    #[arg(long)]
    unsafe_grid: bool,
}

#[derive(Debug, Args)]
struct BacktestArgs {
    /// CSV with `date,return` rows.
    #[arg(long)]
    returns: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Transaction cost per side in basis points.
    #[arg(long, default_value_t = 5.0)]
    cost_bps: f64,
    /// Strategies written to the wealth file.
    #[arg(long, default_value_t = 5)]
    top: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Signals,
    Returns,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    Upper,
    TwoSided,
}

#[derive(Debug, Args)]
struct SignificanceArgs {
    /// Signal matrix written by `backtest`.
    #[arg(long)]
    signals: PathBuf,
    #[arg(long, value_enum, default_value = "signals")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "upper")]
    side: Side,
    #[arg(long, default_value_t = 5000)]
    resamples: usize,
    #[arg(long, default_value_t = 5)]
    block_size: usize,
    /// QS kernel bandwidth.
    #[arg(long, default_value_t = 2.7)]
    bandwidth: f64,
    /// Rows printed to stdout.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Debug, Args)]
struct FactorsArgs {
    /// Strategy returns: `date,return`, or a table together with `--column`.
    #[arg(long)]
    returns: PathBuf,
    /// Column of a multi-column returns table, e.g. `FCT/2/370`.
    #[arg(long)]
    column: Option<String>,
    /// Monthly factor file in percent (Kenneth French layout).
    #[arg(long)]
    factors: PathBuf,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', value_parser = parse_factor_model)]
    models: Vec<FactorModel>,
    /// Fewest overlapping months accepted.
    #[arg(long, default_value_t = 24)]
    min_months: usize,
}

#[derive(Debug, Args)]
struct BiasArgs {
    /// Sample lengths T.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_values_t = [2, 3, 4, 5, 10, 20, 50, 100, 200, 500])]
    lengths: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
}

#[derive(Debug, Args)]
struct BlockArgs {
    /// AR coefficients of the null process; none means i.i.d.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',')]
    phi: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 500)]
    length: usize,
    #[arg(long, default_value_t = 199)]
    resamples: usize,
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20])]
    candidates: Vec<usize>,
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    #[arg(long, default_value_t = 2.7)]
    bandwidth: f64,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: signtree_core::Error| e.to_string())
}

fn parse_factor_model(s: &str) -> Result<FactorModel, String> {
    s.parse().map_err(|e: signtree_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let result = config::expand_args(std::env::args().collect())
        .and_then(|args| commands::run(Cli::parse_from(args)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
