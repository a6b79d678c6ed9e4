//! Config-driven batch front-end behind the `templab` binary.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 configuration error,
//! 3 escape from the outer box or non-finite truncation, 4 certification or
//! search did not pass.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    compare_rows, run_certify, run_compare, run_search, run_simulate, run_sweep, sweep_rows, CompareRow, SweepRow,
};
pub use config::{
    resolve, BoxSection, InitSection, IntegratorSection, ObserverSection, OneOrMany, OutputsSection, Resolved,
    RunConfig, SpecSection, SystemSection, TemplateSection,
};

use crate::error::LabError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ESCAPE: i32 = 3;
pub const EXIT_NOT_CERTIFIED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "templab", version, about = "Templated output-feedback stabilization laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one closed loop; writes arc.csv and summary.json.
    Simulate(CommonArgs),
    /// Grid-certify the template; writes certification.json.
    Certify(CommonArgs),
    /// Randomized template search; writes search.json.
    Search(CommonArgs),
    /// θ × Δ grid of templated runs; writes sweep.csv.
    Sweep(CommonArgs),
    /// The three loops side by side; writes compare.csv.
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `outputs.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "LAB_THREADS")]
    pub threads: Option<usize>,
}

pub fn exit_code_for(err: &LabError) -> i32 {
    match err {
        LabError::Config(_)
        | LabError::Parse { .. }
        | LabError::UnknownSystem(_)
        | LabError::Dimension(_)
        | LabError::ZeroTemplate
        | LabError::Capability { .. } => EXIT_CONFIG,
        LabError::Numerical(_) | LabError::InsufficientSamples { .. } | LabError::Io(_) => EXIT_FAILURE,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (Command::Simulate(args)
    | Command::Certify(args)
    | Command::Search(args)
    | Command::Sweep(args)
    | Command::Compare(args)) = &cli.command;
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::debug!("thread pool already configured: {e}");
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Certify(a) => run_certify(a),
        Command::Search(a) => run_search(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Compare(a) => run_compare(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
