//! Command-line front end for `prodnorm-core`.
//!
//! [`run`] is the whole program minus process setup, so tests can drive it
//! with in-memory streams. Exit codes: 0 success, 1 usage or invalid input,
//! 2 resource limit, 3 a repro case failed.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::Parser;

pub mod cli;
mod commands;
pub mod output;
pub mod repro;

use cli::{Cli, Command};
use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_REPRO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(prodnorm_core::Error),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(prodnorm_core::Error::Resource(_)) => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(s) => f.write_str(s),
        }
    }
}

impl From<prodnorm_core::Error> for CliError {
    fn from(e: prodnorm_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let format = if cli.global.json {
        Format::Json
    } else if cli.global.csv {
        Format::Csv
    } else {
        Format::Human
    };
    let outcome = match &cli.command {
        Command::Norm(c) => commands::norm(c, &cli.global).map(|r| (r, EXIT_OK)),
        Command::Sop(c) => commands::sop(c, &cli.global).map(|r| (r, EXIT_OK)),
        Command::Game(c) => commands::game(c, &cli.global).map(|r| (r, EXIT_OK)),
        Command::Repro { case } => repro::command(case, &cli.global),
    };
    match outcome {
        Ok((report, code)) => {
            if let Err(e) = output::write(out, &report, format) {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return EXIT_INPUT;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
