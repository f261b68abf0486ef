//! `idq`: trajectories, indistinguishability sweeps, figure data and oracle
//! validation.
//!
//! Exit status is 0 on success, 1 when `validate` finds a deviation and 2 for
//! bad input.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use idq_core::pipeline::{run_evolve, run_figure, run_sweep, run_validate, ForcedCase, ValidateOptions};

#[derive(Parser)]
#[command(name = "idq", version, about = "Identical qubits under localized noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrence, populations and P_LR over time for one configuration.
    Evolve {
        config: PathBuf,
        /// Write the CSV here instead of `output_path` or stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Concurrence and P_LR across indistinguishability values.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the CSVs behind a figure (2a, 2b, 3a, 3b, 4a, 4b, A1, A2).
    Figure {
        id: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare closed forms against the Lindblad oracle on random cases.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        cases: u64,
        /// Pin every case to `separated-dephasing` or `coincident-damping`.
        #[arg(long)]
        force: Option<ForcedCase>,
    },
}

enum Failure {
    Validation,
    Input(String),
}

impl From<idq_core::Error> for Failure {
    fn from(e: idq_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(csv: &str, target: Option<PathBuf>) -> Result<(), Failure> {
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
            }
            fs::write(&path, csv).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Evolve { config, out } => {
            let cfg = config::parse_run(&read(&config)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
            let record = run_evolve(&cfg)?;
            emit(&record.to_csv(), out.or(cfg.output_path.map(PathBuf::from)))
        }
        Command::Sweep { config, out } => {
            let (cfg, path) = config::parse_sweep(&read(&config)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
            let table = run_sweep(&cfg)?;
            emit(&table.to_csv(), out.or(path.map(PathBuf::from)))
        }
        Command::Figure { id, out } => {
            let files = run_figure(&id)?;
            fs::create_dir_all(&out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
            for file in files {
                let path = out.join(&file.name);
                fs::write(&path, &file.contents)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Validate { seed, cases, force } => {
            let report = run_validate(&ValidateOptions {
                seed,
                cases: cases as usize,
                force,
            })?;
            println!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
