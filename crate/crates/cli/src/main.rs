//! `crowdfuse` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 I/O failure.

mod commands;
mod error;
mod staging;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "crowdfuse", version, about = "Fuse examiner verdicts, simulate crowds and report CCRs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse the verdicts of a single crowd and print one line per method.
    Fuse(FuseArgs),
    /// Synthesize a population, run the grouping experiment and write every report.
    Simulate(SimulateArgs),
    /// Run the grouping experiment on a recorded dataset.
    Analyze(AnalyzeArgs),
    /// Rebuild report files from a raw experiment CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Decisions, 0 = bona fide, 1 = manipulated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub d: Option<Vec<i64>>,
    /// Confidence levels, 1..=max-confidence.
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<u8>>,
    /// Experience levels, 1..=max-experience.
    #[arg(long, value_delimiter = ',')]
    pub e: Option<Vec<u8>>,
    /// Decision times in whole seconds.
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<u32>>,
    /// TOML file with `d`, `c`, `e`, `t` arrays; flags override its entries.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Methods to evaluate; defaults to every method the given vectors allow.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[command(flatten)]
    pub scales: ScaleArgs,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ScaleArgs {
    /// Highest confidence level C (default 5).
    #[arg(long)]
    pub max_confidence: Option<u8>,
    /// Highest experience level E (default 5).
    #[arg(long)]
    pub max_experience: Option<u8>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct PlanArgs {
    /// Master seed. Required here or in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Crowd sizes, odd (default 3,5,7).
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Groups sampled per crowd size (default 1000).
    #[arg(long)]
    pub n_groups: Option<usize>,
    /// Fusion methods (default MV,CF,EF,TF,OF).
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Inclusive upper edges of the decision-time bins, in seconds.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
    pub time_bins: Vec<u32>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Run the batch loops on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
    /// Output directory; created or merged into once the run succeeds.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Population/model spec file (TOML). Flags override its entries.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Number of synthetic examiners.
    #[arg(long)]
    pub n_examiners: Option<usize>,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub scales: ScaleArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub profiles: PathBuf,
    #[arg(long)]
    pub trials: PathBuf,
    /// Run config (TOML): seed, ks, n_groups, methods and scale keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[command(flatten)]
    pub scales: ScaleArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Raw experiment CSV written by `simulate` or `analyze`.
    #[arg(long)]
    pub raw: PathBuf,
    /// Breakdown dimensions: confidence, experience, time. Need the dataset.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<String>,
    /// Dataset the raw file came from; enables trial cross-checks and breakdowns.
    #[arg(long, requires = "trials")]
    pub profiles: Option<PathBuf>,
    #[arg(long, requires = "profiles")]
    pub trials: Option<PathBuf>,
    /// Inclusive upper edges of the decision-time bins, in seconds.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
    pub time_bins: Vec<u32>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub scales: ScaleArgs,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fuse(a) => commands::fuse(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
