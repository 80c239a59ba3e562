mod output;
mod recur;
mod table;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oplab::sum::Precision;

/// Orthogonal polynomials, Christoffel-Darboux kernels and zero counting measures.
#[derive(Debug, Parser)]
#[command(name = "oplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recurrence coefficients of a measure (Jacobi or Verblunsky).
    Recur(recur::RecurArgs),
    /// Run one experiment (or `all`) and write JSON + CSV reports.
    Verify(verify::VerifyArgs),
    /// Plot-ready tables.
    Table(table::TableArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PrecisionArg {
    Standard,
    High,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Standard => Precision::Standard,
            PrecisionArg::High => Precision::High,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory (default: $OPLAB_OUT_DIR, then ./oplab-out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
}

/// Exit status contract.
#[derive(Debug)]
pub enum Failure {
    /// Some hard assertion failed (exit 1).
    Assertion,
    /// Bad input, unknown id, unmet precondition (exit 2).
    Usage(String),
    /// Breakdown, drift, non-convergence (exit 3).
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Assertion => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<oplab::Error> for Failure {
    fn from(e: oplab::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Recur(a) => recur::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Table(a) => table::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Assertion => {}
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
