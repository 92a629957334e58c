//! `flutter`: optimize, sample, analyze and simulate flutter-shutter codes.
//!
//! Exit codes: 0 on success, 1 on runtime or I/O failure, 2 on invalid usage.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flutter_core::imaging::ImagingError;
use flutter_core::{OptimizerError, SeqError, SpectralError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ImagingError> for CliError {
    fn from(e: ImagingError) -> Self {
        match e {
            ImagingError::Io { .. } | ImagingError::Codec { .. } => {
                CliError::Runtime(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "flutter",
    version,
    about = "Light-efficient flutter-shutter code design and evaluation"
)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed; generated and printed when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files (default: current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Progress and data file format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Key = value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize a one-of-N code with the genetic algorithm.
    Optimize(commands::OptimizeArgs),
    /// Best of N uniformly random one-of-N codes.
    Sample(commands::SampleArgs),
    /// Power spectra of a sequence or code word.
    Spectrum(commands::SpectrumArgs),
    /// Blur / noise / deblur simulation matrix.
    Simulate(commands::SimulateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
