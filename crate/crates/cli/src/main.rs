//! `contraction-kit`: matrix measures, sampled contraction certificates,
//! trajectory checks and the reaction-diffusion demo from the command line.
//!
//! Exit codes: 0 certified or passed, 1 falsified or failed, 2 usage or
//! configuration error.

mod commands;
mod config;

use std::env;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{usage, CliError, CliResult};

const THREADS_VAR: &str = "CONTRACTION_KIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "contraction-kit", version, about = "Contraction certificates and decay checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Matrix measure, operator norm and the sandwich inequality for a matrix.
    Measure(commands::MeasureArgs),
    /// Sample a contraction condition and print the certificate as JSON.
    Certify(commands::CertifyArgs),
    /// Integrate a catalog system with RK4 and write the trajectory as CSV.
    Simulate(commands::SimulateArgs),
    /// Check a decay estimate along simulated trajectories.
    Verify(commands::VerifyArgs),
    /// Run the reaction-diffusion example and write its decay series,
    /// snapshots and hypothesis certificate.
    RdDemo(commands::RdDemoArgs),
}

fn configure_threads() -> CliResult<()> {
    let raw = match env::var(THREADS_VAR) {
        Ok(v) => v,
        Err(env::VarError::NotPresent) => return Ok(()),
        Err(env::VarError::NotUnicode(_)) => return usage(format!("{THREADS_VAR} is not valid unicode")),
    };
    let requested = match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => n,
        _ => return usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")),
    };
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    rayon::ThreadPoolBuilder::new()
        .num_threads(requested.min(cores))
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    configure_threads()?;
    match &cli.command {
        Command::Measure(a) => commands::measure(a),
        Command::Certify(a) => commands::certify(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
        Command::RdDemo(a) => commands::rd_demo(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
