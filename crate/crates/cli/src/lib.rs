//! Command-line driver for `qcorr`: CSV ingestion, one subcommand per
//! library operation, CSV and JSON-lines output.

pub mod args;
mod commands;
pub mod error;
pub mod ingest;
pub mod output;

use std::io::Write;

use clap::Parser;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;

/// Parses `argv`, runs the command and returns the process exit code.
/// Usage errors exit with 1, like other domain errors.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
