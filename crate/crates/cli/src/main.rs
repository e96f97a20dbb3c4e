//! `affine`: command-line driver for affine jump process models.
//!
//! Results go to stdout (or `--output`). Every failure prints a JSON object
//! to stderr and exits with 2 when the model cannot be loaded or is invalid,
//! and 1 otherwise.

mod args;
mod commands;
mod error;
mod json;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use error::CliError;

/// Caps the simulation thread pool.
const THREADS_VAR: &str = "AFFINE_NUM_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Failure { kind: "internal", message: e.to_string() })
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (output, target) = commands::run(&cli.command)?;
    let text = output.render();
    let written = match &target.output {
        Some(path) => std::fs::write(path, text).map_err(|e| (path.display().to_string(), e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| ("stdout".to_string(), e)),
    };
    written.map_err(|(path, e)| CliError::Failure { kind: "write_error", message: format!("{path}: {e}") })
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", serde_json::to_string(&err.to_json()).expect("JSON values serialize"));
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            return fail(&CliError::usage(message.trim()));
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
