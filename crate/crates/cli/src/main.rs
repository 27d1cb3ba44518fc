//! `qcsolve`: spectra, state tables, radial levels and oracle audits for
//! one-dimensional and central potentials read from JSON.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Semiclassical bound states from the two-turning-point quantization
/// condition.
#[derive(Debug, Parser)]
#[command(name = "qcsolve", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantized levels n, E_n, W(E_n) and the condition residual.
    Spectrum(SpectrumArgs),
    /// Tabulate one state function on the padded classical window.
    Wavefunction(WavefunctionArgs),
    /// Compare quantized levels with the finite-difference oracle.
    Audit(AuditArgs),
    /// Radial levels of a central potential with derived angular momentum.
    Radial(RadialArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Potential description (JSON).
    pub potential: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of levels, counted from n = 0.
    #[arg(long, default_value_t = 10)]
    pub levels: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct WavefunctionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Quantum number.
    #[arg(long)]
    pub n: u32,
    /// Number of uniformly spaced rows.
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 10)]
    pub levels: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Interior points of the oracle grid (odd).
    #[arg(long, default_value_t = 4001)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct RadialArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0)]
    pub ntheta: u32,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub mz: i32,
    /// Highest radial quantum number.
    #[arg(long, default_value_t = 2)]
    pub nrmax: u32,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Truncated,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Truncated) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
