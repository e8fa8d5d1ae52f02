//! `cdc-sim`: run shuffle experiments, sweep load curves, and write or
//! replay transcript fixtures.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;

pub use config::{JobConfig, JobFlags};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }
}

impl From<cdc_core::Error> for CliError {
    fn from(e: cdc_core::Error) -> Self {
        use cdc_core::Error as E;
        match e {
            E::Unsupported(_) | E::UnsupportedDegree(_) => CliError::Unsupported(e.to_string()),
            E::Malformed(_) | E::IncompleteShuffle { .. } => CliError::Verification(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cdc-sim", version, about = "Coded distributed computing shuffle simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map, shuffle and reduce one job; writes loads.csv and result.json.
    Run(JobFlags),
    /// Write the CSV table of a fig2, fig3 or fig4 preset.
    Sweep(JobFlags),
    /// Write transcript fixtures of the `paper-wordcount` preset job.
    Fixture(JobFlags),
    /// Decode a transcript fixture and check the reduce outputs.
    Replay {
        transcript: PathBuf,
        #[command(flatten)]
        flags: JobFlags,
    },
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(f) => commands::cmd_run(f),
        Command::Sweep(f) => commands::cmd_sweep(f).map(|_| ()),
        Command::Fixture(f) => commands::cmd_fixture(f).map(|_| ()),
        Command::Replay { transcript, flags } => commands::cmd_replay(transcript, flags),
    }
}

/// Caps the rayon pool at `CDC_SIM_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CDC_SIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("CDC_SIM_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
