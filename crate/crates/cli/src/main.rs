//! `mfrac`: batch front end for operator evaluation, weight-class constants
//! and suite runs. All outputs are sorted-key JSON; wall-clock data goes to a
//! `.log` sidecar next to the output file.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mfrac_core::Error;

/// Verdict fail.
pub const EXIT_FAIL: u8 = 1;
/// Suite hypotheses not met by the scenario.
pub const EXIT_UNMET: u8 = 2;
/// Potential evaluation refused by the cost cap.
pub const EXIT_COST_CAP: u8 = 3;
/// Bad usage, malformed config or invalid parameters.
pub const EXIT_INVALID: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "mfrac", version, about = "Multilinear fractional operators on dyadic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the weight described by the config's `generator` section.
    GenWeight(Common),
    /// Apply the configured operator to the configured inputs.
    Eval(EvalArgs),
    /// Compute the configured weight-class condition.
    CheckClass(Common),
    /// Run the configured suite; the exit code reflects the verdict.
    Verify(Common),
    /// Summarize suite results as JSON or CSV.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Operator output grid (`.csv` for CSV); overrides `output.grid_path`.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    /// Config to run through `verify` first.
    #[arg(long, required_unless_present = "input")]
    pub config: Option<PathBuf>,
    /// Previously written `verify` outputs.
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: bool,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::CostCap { .. }) => EXIT_COST_CAP,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::GenWeight(a) => commands::gen_weight(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::CheckClass(a) => commands::check_class(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mfrac: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
