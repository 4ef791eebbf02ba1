//! `pulseforge` command-line front end.

mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Filter design, modem simulation and fast convolution.
#[derive(Debug, Parser)]
#[command(name = "pulseforge", version, about)]
pub struct Cli {
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel simulation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FirMethod {
    /// Band-power eigenvector design.
    Slepian,
    /// Slepian taper from the commuting tridiagonal matrix.
    Taper,
    /// Weighted least-squares fit to a delayed ideal low-pass.
    Wise,
    /// Sinc tapered by a Slepian window.
    WindowedSinc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Designs a low-pass FIR filter.
    DesignFir {
        #[arg(long, value_enum)]
        method: FirMethod,
        /// Filter length.
        #[arg(long)]
        m: usize,
        /// Cut-off in cycles/sample (sinc cut-off for windowed-sinc).
        #[arg(long)]
        fc: Option<f64>,
        /// Pass-band edge in cycles/sample (wise).
        #[arg(long)]
        flo: Option<f64>,
        /// Stop-band edge in cycles/sample (wise).
        #[arg(long)]
        fhi: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        wpass: f64,
        #[arg(long, default_value_t = 1.0)]
        wstop: f64,
        /// Desired delay in samples (wise); defaults to the centre tap.
        #[arg(long)]
        q: Option<f64>,
        /// Window cut-off in cycles/sample (windowed-sinc).
        #[arg(long)]
        window_fc: Option<f64>,
        /// Also write the frequency response as CSV.
        #[arg(long)]
        response_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        points: usize,
    },
    /// Designs a discretized Butterworth low-pass and its causal split.
    DesignIir {
        /// Half order `M`; the zero-phase design has order `2M`.
        #[arg(long)]
        half_order: usize,
        /// Cut-off in cycles/sample.
        #[arg(long)]
        fc: f64,
        #[arg(long)]
        response_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        points: usize,
    },
    /// Analyzes a tap sequence read from CSV.
    Analyze {
        #[arg(long)]
        taps: PathBuf,
        /// Index of `h[0]` within the file (centre tap when absent).
        #[arg(long)]
        origin: Option<usize>,
        /// Band edge in cycles/sample for the power-concentration value.
        #[arg(long)]
        fc: Option<f64>,
        #[arg(long)]
        response_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        points: usize,
    },
    /// Simulates a modem link from a JSON configuration or a preset.
    SimulateLink {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Directory for CSV dumps of the transmitted and received signals.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        /// Prints the resolved JSON configuration instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// Filters a CSV stream with a CSV kernel by overlap-add.
    Fastconv {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Requested data-block length `L`.
        #[arg(long)]
        block: usize,
    },
    /// Runs a preset and checks it against its expected metrics.
    Verify {
        /// Preset name, or `all`.
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        preset: Option<String>,
        /// Preset described in a JSON file.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

/// Error reported on standard error as JSON.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: "internal",
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::usage(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<pulseforge::Error> for CliError {
    fn from(e: pulseforge::Error) -> Self {
        Self::usage(e.to_string())
    }
}

/// Successful completion; `false` means a metric check failed.
pub type Outcome = Result<bool, CliError>;

fn report_error(e: &CliError) {
    let body = serde_json::json!({ "error": e });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            report_error(&CliError::usage(e.to_string().trim().to_string()));
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            report_error(&CliError::usage("--threads must be at least 1"));
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            report_error(&CliError::internal(e.to_string()));
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            report_error(&e);
            ExitCode::from(2)
        }
    }
}
