use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Stationary transforms and tails of reflected Brownian motion in the quadrant.
#[derive(Parser, Debug)]
#[command(name = "rbmq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derived scalars, hyperbola, regime, group and solution nature.
    Analyze(Common),
    /// Evaluate a transform at a complex point.
    Eval(EvalArgs),
    /// Tail asymptotics of a boundary density.
    Asympt(AsymptArgs),
    /// Monte Carlo estimates of Laplace values, local-time rates and histograms.
    Simulate(SimulateArgs),
    /// Numerical inversion of a boundary transform.
    Invert(InvertArgs),
    /// Run the invariant suite; exit status 1 if any invariant fails.
    Check(CheckArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct Common {
    /// JSON model config: {"sigma": [[..],[..]], "mu": [..], "r": [[..],[..]]}
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub output: Option<Output>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Function {
    Phi,
    Phi1,
    Phi2,
    W,
    Psi1,
    Psi2,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "fn", value_enum)]
    pub function: Function,
    /// Argument of a one-variable function.
    #[arg(long, allow_hyphen_values = true)]
    pub re: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub im: f64,
    /// First argument of phi.
    #[arg(long, allow_hyphen_values = true)]
    pub re1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub im1: f64,
    /// Second argument of phi.
    #[arg(long, allow_hyphen_values = true)]
    pub re2: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub im2: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Nu1,
    Nu2,
}

#[derive(Args, Debug)]
pub struct AsymptArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "nu1")]
    pub side: SideArg,
    /// Points at which to evaluate the leading-order tail.
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    BridgeMinimum,
    Projection,
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "nu1")]
    pub side: SideArg,
    #[arg(long, default_value_t = 0.1)]
    pub min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Logarithmically spaced grid.
    #[arg(long)]
    pub log: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Model config; when omitted a random ergodic model is drawn from --seed.
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub output: Option<Output>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process exit status for each failure class.
pub enum Failure {
    CheckFailed,
    InvalidConfig(anyhow::Error),
    Refused(anyhow::Error),
    Io(anyhow::Error),
}

pub fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Eval(a) => commands::eval(a),
        Command::Asympt(a) => commands::asympt(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Invert(a) => commands::invert(a),
        Command::Check(a) => commands::check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::CheckFailed) => ExitCode::from(1),
        Err(Failure::InvalidConfig(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Refused(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
