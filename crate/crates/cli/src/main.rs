//! Batch driver for the SPEED pipeline: edge detection over image
//! directories, raw-Canny comparison, ablation and stage-order studies,
//! and scaling benchmarks. Emits CSV reports, edge/overlay PNGs, and a
//! timing plot.

use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

mod plot;
mod run;

#[derive(Debug, Parser)]
#[command(name = "speed", version, about = "Satellite-image edge detection pipeline")]
pub struct Args {
    /// TOML pipeline configuration; defaults apply for omitted keys
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Directory of input images (PNG or uncompressed TIFF)
    #[arg(long)]
    pub input: PathBuf,

    /// Directory of DOTA-style annotation text files, one per image stem
    #[arg(long)]
    pub annotations: Option<PathBuf>,

    /// Output directory for reports and rendered images
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum)]
    pub mode: Mode,

    /// Worker threads; defaults to available parallelism
    #[arg(long)]
    pub workers: Option<usize>,

    /// Run conditional stages unconditionally
    #[arg(long)]
    pub force_conditionals: bool,

    /// Stages to drop from the configured order (comma-separated abbreviations)
    #[arg(long, value_delimiter = ',')]
    pub disable: Vec<String>,

    /// Stage-order file for order-study mode, one order per line (e.g. WB-AD-CN-FHH-MB-GB-CB)
    #[arg(long)]
    pub orders: Option<PathBuf>,

    /// Square sizes for bench mode (comma-separated)
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Detect,
    Evaluate,
    Ablate,
    OrderStudy,
    Bench,
}

/// Invalid invocations exit 2; failures while processing exit 1.
pub enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

pub fn usage(err: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(err.into())
}

pub fn runtime(err: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(err.into())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run::run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(e)) => {
            eprintln!("speed: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(e)) => {
            eprintln!("speed: {e:#}");
            ExitCode::from(2)
        }
    }
}
