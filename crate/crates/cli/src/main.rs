mod commands;
mod config;
mod output;

use std::io;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Invocation, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical check failed: {0}")]
    CheckFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl From<kdv_ginibre::Error> for CliError {
    fn from(e: kdv_ginibre::Error) -> Self {
        if e.is_numerical_check() {
            CliError::CheckFailed(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::CheckFailed(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let inv = match Invocation::try_parse_from(argv) {
        Ok(inv) => inv,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let result = RunConfig::validate(inv).and_then(commands::run);
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("kdv-ginibre: {e}");
            e.code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
