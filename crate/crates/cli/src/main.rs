//! `bnls`: command-line front end for the delta-NLS pipeline.

// `!(a > b)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use config::{Command, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error(transparent)]
    Numerical(#[from] bnls_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use bnls_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical(E::InvalidGrid(_) | E::InvalidArgument(_) | E::Io(_) | E::Format(_)) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bnls", about = "Focusing NLS with a delta potential: extension, scattering, reconstruction")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.validate(args.command)?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Output(format!("{}: {e}", args.out.display())))?;
    log::info!("running {:?} into {}", args.command, args.out.display());
    commands::run(args.command, &cfg, &args.out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BNLS_LOG", "error")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Numerical(inner) if e.exit_code() == 3 => eprintln!("guard {}: {inner}", inner.guard_name()),
                _ => eprintln!("{e}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
