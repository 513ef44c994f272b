//! `hilbert` command-line tool. Exit status: 0 on success, 1 on invalid input, 2 when a
//! fit fails to converge.

mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use crate::commands::CliError;
use crate::config::{Cli, ExperimentConfig};

fn run() -> Result<(), CliError> {
    let mut cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(CliError::Usage(msg.strip_prefix("error: ").unwrap_or(&msg).trim_end().to_string()));
        }
    };
    if let Some(path) = cli.common.config.clone() {
        ExperimentConfig::load(&path).map_err(CliError::Usage)?.merge(&mut cli);
    }
    commands::dispatch(cli)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
