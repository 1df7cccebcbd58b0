//! Command-line front end for the `optomech` library: configuration files,
//! CSV/JSON serialisation and the subcommands that drive the pipelines.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::Parser;

pub use commands::Cli;
pub use config::{Config, ConfigError};
pub use report::RunReport;

/// Failure of a command, carrying its exit status.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configuration or input files. Exit status 2.
    #[error("{0}")]
    Validation(String),
    /// A fit or calibration could not produce a result. Exit status 3.
    #[error("{0}")]
    Fit(String),
    /// Anything else, e.g. I/O. Exit status 1.
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Fit(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl From<optomech::Error> for CliError {
    fn from(e: optomech::Error) -> Self {
        use optomech::Error as E;
        match e {
            E::Domain(_) => CliError::Validation(e.to_string()),
            E::Regenerative { .. } => CliError::Other(e.to_string()),
            E::NoPeak { .. }
            | E::NotConverged { .. }
            | E::Singular { .. }
            | E::Calibration(_)
            | E::Infeasible(_)
            | E::Insensitive(_) => CliError::Fit(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(format!("configuration: {e}"))
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Other(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Parses `args`, runs the command and writes the run report to `stderr`.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let start = Instant::now();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            if code == 0 {
                print!("{e}");
            } else {
                let _ = write!(stderr, "{}", e.render());
            }
            return code;
        }
    };
    let mut report = RunReport::new(cli.command.name());
    let outcome = commands::execute(&cli, &mut report);
    report.wall_time_s = start.elapsed().as_secs_f64();
    let code = match &outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            report.error = Some(e.to_string());
            e.exit_code()
        }
    };
    report.exit_code = code;
    let _ = writeln!(stderr, "{}", report.to_json());
    code
}
