//! `liefund` — symmetry verification, source-algebra derivation, symmetry
//! reduction, and numeric kernel checks, driven by `.lft` problem files.
//!
//! Exit codes: 0 all checks passed (warnings allowed), 1 at least one check
//! failed, 2 usage or parse error. The environment variable
//! `LIEFUND_TERM_CAP` bounds the size of intermediate symbolic expressions.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "liefund",
    version,
    about = "Lie symmetry analysis and kernel verification for linear PDEs"
)]
struct Cli {
    /// Emit the report as JSON (schema version 1)
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check declared fields against the equation's invariance criterion
    #[command(name = "verify-symmetry")]
    VerifySymmetry {
        /// Problem file (.lft)
        file: PathBuf,
        /// Field names to check; ranges like X1..X8 expand (default: all)
        fields: Vec<String>,
    },
    /// Derive the subalgebra whose flows fix the source point
    Fundsol {
        /// Problem file (.lft)
        file: PathBuf,
    },
    /// Reduce the equation through the file's ansatz and verify the profile
    Reduce {
        /// Problem file (.lft)
        file: PathBuf,
    },
    /// Numeric verification of the closed-form kernel
    #[command(name = "verify-kernel")]
    VerifyKernel {
        /// Problem file (.lft)
        file: PathBuf,
        /// Local tolerance of the flow integrator (default 1e-12)
        #[arg(long)]
        tol: Option<f64>,
        /// Gauss-Hermite points per axis (default 20; composition uses 30)
        #[arg(long)]
        points: Option<usize>,
        /// Composition times as a strictly increasing CSV "t1,t2,t3"
        #[arg(long)]
        times: Option<String>,
        /// Override the kernel amplitude (default √3/(2π), the unit-mass value)
        #[arg(long)]
        c1: Option<f64>,
        /// Seed for the sampled point sets (default 7)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Commutator table and structure constants of the declared fields
    Commutators {
        /// Problem file (.lft)
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli.command) {
        Ok(report) => {
            report.emit(cli.json);
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
