//! `mathling` — command-line driver for the corpus pipeline.
//!
//! Subcommands mirror the pipeline stages: `translate` and `verify` guard
//! machine translations, `sample` and `rft-filter` grow and prune reasoning
//! paths, `build` assembles instruction datasets, `eval` scores a model,
//! and `stats` tabulates counts. Data flows as line-delimited JSON on
//! standard output (or `--out`); progress and summaries go to standard
//! error.
//!
//! Exit codes: 0 on success, 1 for usage/validation problems, 2 for I/O
//! or backend failures.

mod backend;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    BuildArgs, EvalArgs, RftFilterArgs, SampleArgs, StatsArgs, TranslateArgs, VerifyArgs,
};

/// Corpus construction and evaluation for multilingual math-reasoning
/// instruction data.
#[derive(Debug, Parser)]
#[command(name = "mathling", version, about)]
struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for every randomized step.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker budget: CPU threads and concurrent backend calls.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Print the planned work and exit without backend calls or output.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Translate an English corpus, keeping verified translations only.
    Translate(TranslateArgs),
    /// Re-check a multilingual corpus against its English sources.
    Verify(VerifyArgs),
    /// Assemble an instruction dataset from a verified corpus.
    Build(BuildArgs),
    /// Sample reasoning paths per problem at high temperature.
    Sample(SampleArgs),
    /// Keep correct sampled paths and deduplicate them by formula identity.
    RftFilter(RftFilterArgs),
    /// Score a model over a test set and report per-language accuracy.
    Eval(EvalArgs),
    /// Print count tables for corpora, datasets or path pools.
    Stats(StatsArgs),
}

/// Failure classes, split by exit code: misuse and invalid inputs (1)
/// versus filesystem and backend trouble (2).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

/// Execution context shared by every subcommand: the effective
/// configuration plus the global flag overrides (flags win).
pub struct Ctx {
    pub config: config::PipelineConfig,
    seed: Option<u64>,
    jobs: Option<usize>,
    pub dry_run: bool,
}

impl Ctx {
    /// Effective seed: the `--seed` flag, else the configured one.
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(self.config.seed)
    }

    /// Seed only when given on the command line.
    pub fn seed_override(&self) -> Option<u64> {
        self.seed
    }

    /// Effective worker budget, never zero.
    pub fn jobs(&self) -> usize {
        self.jobs.unwrap_or(self.config.jobs).max(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not failures; any other parse problem
            // (unknown subcommand, unknown flag, bad value) is usage
            // misuse and exits 1.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = config::load(cli.config.as_deref())?;
    let ctx = Ctx {
        config,
        seed: cli.seed,
        jobs: cli.jobs,
        dry_run: cli.dry_run,
    };
    match cli.command {
        Command::Verify(args) => commands::verify(&ctx, args),
        Command::Build(args) => commands::build(&ctx, args),
        Command::RftFilter(args) => commands::rft_filter(&ctx, args),
        Command::Stats(args) => commands::stats(&ctx, args),
        Command::Translate(args) => runtime(ctx.jobs())?.block_on(commands::translate(&ctx, args)),
        Command::Sample(args) => runtime(ctx.jobs())?.block_on(commands::sample(&ctx, args)),
        Command::Eval(args) => runtime(ctx.jobs())?.block_on(commands::eval(&ctx, args)),
    }
}

/// Async runtime for the backend-calling subcommands, its thread count
/// bounded by the worker budget.
fn runtime(jobs: usize) -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(jobs.min(32))
        .enable_all()
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start async runtime: {e}")))
}
