//! Command-line driver for the Markov and random-circuit experiments.
//!
//! Every command writes CSV files whose `#` header carries the run manifest,
//! plus a `.manifest.json` sidecar that also records the wall-clock time.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod calibrate;
mod circuit;
mod manifest;
mod markov;
mod svg;

pub use calibrate::{load_interpretation, CalibrateArgs, InterpretationFile, INTERPRETATION_FILE};
pub use circuit::{parse_theta, theta_label, CircuitArgs};
pub use manifest::{read_table, CsvOutput, RunManifest};
pub use markov::{MapArgs, MarkovArgs};

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "IQME_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CALIBRATION: u8 = 3;
pub const EXIT_INSTABILITY: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] iqme::Error),
    #[error("{0}")]
    Usage(String),
    #[error("calibration failed: no physical candidate in the requested grid")]
    NoPhysicalCandidate,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use iqme::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::Calibration(_)) | CliError::NoPhysicalCandidate => EXIT_CALIBRATION,
            CliError::Core(E::Instability { .. } | E::Unphysical { .. }) => EXIT_INSTABILITY,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "iqme", version, about = "Trajectory-length Mpemba experiments")]
pub struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resolve the single-qubit model normalization against the reference anchors.
    Calibrate(CalibrateArgs),
    /// Two-state Markov comparison with residue and distance curves.
    Markov(MarkovArgs),
    /// Length and distance map over the x = 0 disk.
    MarkovMap(MapArgs),
    /// Trajectory-averaged random circuit curves for a list of tilt angles.
    Circuit(CircuitArgs),
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Calibrate(args) => calibrate::run(args, &cli.out),
        Command::Markov(args) => markov::run(args, &cli.out),
        Command::MarkovMap(args) => markov::run_map(args, &cli.out),
        Command::Circuit(args) => circuit::run(args, &cli.out),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
