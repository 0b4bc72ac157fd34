mod args;
mod evolve;
mod output;
mod physical;
mod sweep;
mod transmit;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Rejected input, exit 2.
    Validation(String),
    /// Admissible input whose computation failed, exit 3.
    Numeric(String),
    /// A verification check failed, exit 4. The report is already printed.
    Verification,
    /// Output could not be written, exit 1.
    Io(String),
}

impl From<delta_tunneling::Error> for CliError {
    fn from(e: delta_tunneling::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

fn run() -> Result<(), CliError> {
    let argv = args::merge_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version land here too
            let code = e.exit_code();
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match cli.command {
        Command::Evolve(a) => evolve::run(&a),
        Command::Transmit(a) => transmit::run(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Verify(a) => verify::run(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Verification) => ExitCode::from(4),
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(1)
        }
    }
}
