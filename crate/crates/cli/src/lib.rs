//! Command-line front end: render scenes, compare culling modes, dump load
//! maps, benchmark the pipeline stages and generate synthetic scenes.

pub mod args;
pub mod commands;
pub mod report;

use std::io::Write;

use thiserror::Error;

pub use args::Cli;
pub use commands::run;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] splatcull::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    /// 2 for usage and input problems, 3 for internal invariant violations.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(splatcull::Error::Internal(_)) | CliError::Invariant(_) => 3,
            _ => 2,
        }
    }
}

/// Parses `argv` and runs the command, writing the human-readable summary
/// to `out`. Help and version requests surface as usage errors.
pub fn run_args<I, S>(argv: I, out: &mut impl Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli, out)
}
