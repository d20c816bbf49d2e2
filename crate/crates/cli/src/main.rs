//! `bsf`: digit expansions, constructions, frequency analysis, spectra and
//! verification suites over shifts with the specification property.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bsf_core::ErrorClass;

#[derive(Parser, Debug)]
#[command(name = "bsf", version, about)]
struct Cli {
    /// Flat `key=value` config file; flags take precedence over its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy β-expansion digits of a point in [0,1).
    Expand(ExpandArgs),
    /// Build a digit stream that visits the given frequency targets.
    Construct(ConstructArgs),
    /// Iterated Cesàro block frequencies of a digit file at checkpoints.
    Analyze(AnalyzeArgs),
    /// Constraints, vertices and rational points of the invariant polytope.
    Spectrum(SpectrumArgs),
    /// Run a named self-check suite (or `all`).
    Verify(VerifyArgs),
    /// Sample a path of the maximal-entropy (Parry) measure.
    Sample(SampleArgs),
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    /// `golden`, an integer, a rational `p/q` or a decimal; optional `@depth`.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    /// Shift description: `golden`, `full:N`, `sft:N:w1,w2`, `beta:B[@D]`.
    #[arg(long)]
    pub shift: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Targets as `;`-separated vectors, e.g. `1,0;1/2,1/2`.
    #[arg(long)]
    pub targets: Option<String>,
    /// File with one target vector per line.
    #[arg(long)]
    pub targets_file: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<String>,
    /// `checkpoint` (default) or `property-p`.
    #[arg(long)]
    pub method: Option<String>,
    /// Cycle through the targets until the symbol budget is used.
    #[arg(long)]
    pub cycle: bool,
    /// Allowed word emitted before the first stage.
    #[arg(long)]
    pub prefix: Option<String>,
    /// Window factor W for `property-p`, or `tower`.
    #[arg(long)]
    pub window: Option<String>,
    /// Largest `h` of the property-P schedule.
    #[arg(long)]
    pub h: Option<u64>,
    /// Symbol budget.
    #[arg(long, env = "BSF_BUDGET_SYMBOLS")]
    pub symbols: Option<u64>,
    #[arg(long)]
    pub max_stages: Option<usize>,
    /// Specification constant; computed by probing when absent.
    #[arg(long)]
    pub spec_constant: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Certificate records; one per checkpoint or window.
    #[arg(long)]
    pub certificates: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Shift of the digits; defaults to the file's `shift` header.
    #[arg(long)]
    pub shift: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Highest Cesàro order R.
    #[arg(long)]
    pub r: Option<usize>,
    /// Comma-separated prefix lengths.
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Also report the exact distance (fitted mode) to these targets.
    #[arg(long)]
    pub targets: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub shift: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Denominator bound for the rational points.
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub suite: String,
    /// Window factor for `cesaro-inheritance`; below 64 runs as a negative control.
    #[arg(long = "W", alias = "window")]
    pub window: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "BSF_BUDGET_SYMBOLS")]
    pub symbols: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub shift: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<bsf_core::Error> for Failure {
    fn from(e: bsf_core::Error) -> Self {
        let code = match e.class() {
            ErrorClass::Input => 2,
            ErrorClass::Infeasible => 3,
            ErrorClass::Resource => 4,
            ErrorClass::BoundViolation => 5,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::Config::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Expand(a) => commands::expand(a, &cfg),
        Command::Construct(a) => commands::construct(a, &cfg),
        Command::Analyze(a) => commands::analyze(a, &cfg),
        Command::Spectrum(a) => commands::spectrum(a, &cfg),
        Command::Verify(a) => commands::verify(a, &cfg),
        Command::Sample(a) => commands::sample(a, &cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bsf: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
