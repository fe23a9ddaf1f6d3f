//! `lr-broadcast`: exact solver, optimality checks and Monte Carlo experiments
//! for batch scheduling in RLNC broadcast.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or configuration error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "lr-broadcast", version, about = "Batch scheduling for RLNC broadcast")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the two-receiver MDP exactly and export the value/policy table.
    Solve(SolveArgs),
    /// Check Least-Received optimality and audit value-table inequalities over a grid.
    CheckLr(CheckLrArgs),
    /// Enumerate every deterministic policy of a small instance.
    Oracle(OracleArgs),
    /// Monte Carlo completion times for one coding window.
    Simulate(SimulateArgs),
    /// Monte Carlo completion times over several coding windows.
    Sweep(SweepArgs),
    /// Round-trip random batches through the GF(256) codec.
    CodecValidate(CodecArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub file_size: usize,
    #[arg(long)]
    pub window: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckLrArgs {
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub file_size: Vec<usize>,
    #[arg(long = "window", alias = "windows", value_delimiter = ',', required = true, num_args = 1..)]
    pub window: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub file_size: usize,
    #[arg(long)]
    pub window: usize,
    #[arg(long)]
    pub p: f64,
    /// Largest number of policies to enumerate.
    #[arg(long, default_value_t = lr_broadcast::dp::DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct SimCommon {
    #[arg(long = "receivers", alias = "N")]
    pub receivers: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `ideal` or `codec`.
    #[arg(long, default_value = "ideal")]
    pub mode: String,
    /// Payload bytes per packet in codec mode.
    #[arg(long, default_value_t = lr_broadcast::sim::DEFAULT_CODEC_PAYLOAD)]
    pub payload_len: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Comma-separated subset of lr, rrnc, rs.
    #[arg(long = "policy", alias = "policies", value_delimiter = ',', default_value = "lr")]
    pub policy: Vec<String>,
    #[arg(long)]
    pub file_size: usize,
    #[arg(long)]
    pub window: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[command(flatten)]
    pub common: SimCommon,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "policies", alias = "policy", value_delimiter = ',', default_value = "lr,rrnc,rs")]
    pub policies: Vec<String>,
    #[arg(long, default_value_t = 500)]
    pub file_size: usize,
    #[arg(long = "windows", alias = "window", value_delimiter = ',', required = true, num_args = 1..)]
    pub windows: Vec<usize>,
    #[arg(long, default_value_t = 1_000)]
    pub trials: u64,
    #[command(flatten)]
    pub common: SimCommon,
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    #[arg(long, default_value_t = 16)]
    pub window: usize,
    #[arg(long, default_value_t = 64)]
    pub payload_len: usize,
    #[arg(long, default_value_t = 100_000)]
    pub batches: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// How a successfully executed command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command, args) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
