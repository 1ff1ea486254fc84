//! `evtensor` command-line tool: converts event streams to NPY tensors,
//! summarizes event files, simulates events from frames and times the
//! tensorizer.

mod args;
mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{FormatArg, GridArgs};

#[derive(Debug, Parser)]
#[command(
    name = "evtensor",
    version,
    about = "Event-camera streams to dense tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a tensor representation of an event file and write it as NPY.
    Convert(ConvertArgs),
    /// Print a summary of an event file.
    Info(InfoArgs),
    /// Simulate events from a sequence of PGM intensity frames.
    Synth(SynthArgs),
    /// Time representation construction.
    Bench(BenchArgs),
}

#[derive(Debug, clap::Args)]
pub struct ConvertArgs {
    /// Input event file.
    #[arg(long)]
    pub input: PathBuf,

    /// Input format.
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,

    #[command(flatten)]
    pub grid: GridArgs,

    /// Output NPY file.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct InfoArgs {
    /// Input event file.
    #[arg(long)]
    pub input: PathBuf,

    /// Input format.
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Glob patterns or paths of PGM (P5) frames, taken in sorted order.
    #[arg(long, required = true, num_args = 1..)]
    pub frames: Vec<String>,

    /// Text file with one microsecond timestamp per frame.
    #[arg(long)]
    pub timestamps: PathBuf,

    /// Log-intensity contrast threshold.
    #[arg(long)]
    pub contrast: f64,

    /// Output event file; `.csv` writes CSV, anything else EVT1.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, clap::Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "synthetic"]))]
pub struct BenchArgs {
    /// Input event file.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Input format.
    #[arg(long, value_enum, default_value = "auto", requires = "input")]
    pub format: FormatArg,

    /// Generate this many uniform random events instead of reading a file.
    #[arg(long)]
    pub synthetic: Option<usize>,

    /// Time span of the synthetic stream in microseconds.
    #[arg(long, default_value_t = bench::SYNTHETIC_DURATION_US, requires = "synthetic")]
    pub duration_us: u64,

    /// Seed of the synthetic stream.
    #[arg(long, default_value_t = 0, requires = "synthetic")]
    pub seed: u64,

    #[command(flatten)]
    pub grid: GridArgs,

    /// Timed repetitions after two warmup runs.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(3..))]
    pub repeats: u32,

    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

/// Failure of a subcommand.
#[derive(Debug)]
pub enum CliError {
    /// Inconsistent or missing flags; exit code 2.
    Usage(String),
    /// Error raised by the library; exit code 1.
    Module(evtensor::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<evtensor::Error> for CliError {
    fn from(e: evtensor::Error) -> Self {
        CliError::Module(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Convert(a) => commands::convert(&a),
        Command::Info(a) => commands::info(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Module(e)) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error: {line}");
            ExitCode::from(1)
        }
    }
}
