//! `homothetic` command-line front end.

mod analyze;
mod failure;
mod grid;
mod input;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::failure::Failure;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(
    name = "homothetic",
    version,
    about = "Analyze homothetic functions and the homogeneous Monge-Ampère equation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Comma-separated variable names; inferred from the expression when absent.
    #[arg(long, global = true, value_delimiter = ',')]
    pub vars: Option<Vec<String>>,
    /// Named constant `name=value`; repeatable.
    #[arg(long = "const", global = true, value_name = "NAME=VALUE")]
    pub constants: Vec<String>,
    /// Seed for quasi-random sampling and random trials.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Number of sample points in [0.5, 2]^n.
    #[arg(long, global = true, default_value_t = 64)]
    pub samples: usize,
    /// Normalized Monge-Ampère residual below which a function is flat.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_flat: f64,
    /// Normalized Monge-Ampère residual above which a function is not flat.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub tol_reject: f64,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Omit the generation timestamp from reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree, homotheticity, flatness and curvature of an expression.
    Analyze(analyze::AnalyzeArgs),
    /// Classify a flat homothetic function `F ∘ h`.
    Classify(analyze::ClassifyArgs),
    /// Check a composite-Hessian identity over random trials.
    Verify(verify::VerifyArgs),
    /// Tabulate value, Hessian determinant, curvature and MRS on a grid.
    Grid(grid::GridArgs),
    /// Cross-check closed-form flatness predictions for production models.
    Models(analyze::ModelsArgs),
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    if cli.global.samples == 0 {
        return Err(Failure::usage("--samples must be positive"));
    }
    if !(cli.global.tol_flat > 0.0 && cli.global.tol_flat <= cli.global.tol_reject) {
        return Err(Failure::usage("need 0 < --tol-flat <= --tol-reject"));
    }
    match &cli.command {
        Command::Analyze(a) => analyze::analyze(&cli.global, a),
        Command::Classify(a) => analyze::classify(&cli.global, a),
        Command::Verify(a) => verify::verify(&cli.global, a),
        Command::Grid(a) => grid::grid(&cli.global, a),
        Command::Models(a) => analyze::models(&cli.global, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return Failure::usage(e.to_string().trim_end()).emit(),
    };
    match run(&cli) {
        Ok(report) => match report.write(&cli.global) {
            Ok(()) => ExitCode::SUCCESS,
            Err(f) => f.emit(),
        },
        Err(f) => {
            if let Some(report) = &f.report {
                let _ = report.write(&cli.global);
            }
            f.emit()
        }
    }
}
