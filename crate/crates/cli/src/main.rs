//! `decon`: runs deconstructed-domain experiments from a config file and
//! writes CSV to the configured `output` path or to stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use decon::harness::{self, ExperimentConfig};
use decon::Error;

#[derive(Parser)]
#[command(name = "decon", version, about = "FEM experiments on overlapping, unmerged meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error against the closed form at every resolution.
    Converge { config: PathBuf },
    /// Affine-fit residual over the overlap and 1D derivative jumps.
    Probe { config: PathBuf },
    /// Lowest constrained eigenvalues at the first resolution.
    Modes { config: PathBuf },
    /// Coupling rows at the first resolution.
    Constraints { config: PathBuf },
    /// Per-vertex solution at the first resolution.
    Solve { config: PathBuf },
}

enum Failure {
    Config(Error),
    Solver(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } | Error::Io(_) => Self::Config(e),
            e => Self::Solver(e),
        }
    }
}

fn emit(path: Option<&Path>, csv: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, csv).map_err(|e| Failure::Config(e.into())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let path = match &command {
        Command::Converge { config }
        | Command::Probe { config }
        | Command::Modes { config }
        | Command::Constraints { config }
        | Command::Solve { config } => config,
    };
    let cfg = ExperimentConfig::load(path).map_err(Failure::Config)?;
    let out = cfg.output.as_deref();
    match command {
        Command::Converge { .. } => {
            let rows = harness::run_convergence(&cfg)?;
            emit(out, &harness::convergence_csv(&rows))?;
            if !cfg.penalty_weights.is_empty() {
                let sweep = harness::penalty_sweep(&cfg)?;
                let csv = harness::penalty_csv(&sweep);
                match &cfg.penalty_output {
                    Some(p) => emit(Some(p), &csv)?,
                    None => emit(None, &format!("\n{csv}"))?,
                }
            }
            if let Some(bad) = rows.iter().find(|r| r.solve_status != "ok") {
                return Err(Failure::Solver(Error::InvalidArgument(bad.solve_status.clone())));
            }
        }
        Command::Probe { .. } => emit(out, &harness::probe_csv(&harness::locking_probe(&cfg)?))?,
        Command::Modes { .. } => emit(out, &harness::modes_csv(&harness::run_modes(&cfg)?))?,
        Command::Constraints { .. } => emit(out, &harness::run_constraints(&cfg)?)?,
        Command::Solve { .. } => emit(out, &harness::run_solve(&cfg)?)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e}");
            ExitCode::from(2)
        }
    }
}
