//! Library half of the `diffdrive` command-line tool.
//!
//! [`scenario`] loads and validates TOML scenario files (strict schema,
//! unknown keys rejected) and applies `key=value` overrides; [`output`]
//! renders traces as CSV and run summaries as JSON; [`commands`] implements
//! the analysis subcommands. The binary in `main.rs` is a thin clap wrapper
//! over these.

pub mod commands;
pub mod log;
pub mod output;
pub mod scenario;

use std::path::PathBuf;

use diffdrive::sim::ScenarioError;
use diffdrive::tracking::DesignError;

/// Everything that can go wrong before, during, or after a run.
#[derive(Debug)]
pub enum CliError {
    /// Reading the scenario file failed.
    Read { path: PathBuf, source: std::io::Error },
    /// The scenario file is not valid TOML or violates the schema.
    Parse { path: Option<PathBuf>, message: String },
    /// A schema-level invariant failed; `key` is the offending TOML path.
    Invalid { key: String, message: String },
    /// Core scenario validation failed.
    Scenario(ScenarioError),
    /// Gain design failed (for example a stopped reference).
    Design(DesignError),
    /// The simulation diverged; outputs were still written.
    Diverged,
    /// Writing an output file failed.
    Write { path: PathBuf, source: std::io::Error },
    /// A `--override` or `--sweep` argument could not be parsed.
    BadArgument { argument: String, message: String },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Read { path, source } => {
                write!(f, "cannot read {}: {source}", path.display())
            }
            CliError::Parse { path: Some(path), message } => {
                write!(f, "cannot parse {}: {message}", path.display())
            }
            CliError::Parse { path: None, message } => write!(f, "cannot parse scenario: {message}"),
            CliError::Invalid { key, message } => write!(f, "invalid scenario: {key}: {message}"),
            CliError::Scenario(err) => write!(f, "{err}"),
            CliError::Design(err) => write!(f, "{err}"),
            CliError::Diverged => write!(f, "simulation diverged (trace was still written)"),
            CliError::Write { path, source } => {
                write!(f, "cannot write {}: {source}", path.display())
            }
            CliError::BadArgument { argument, message } => {
                write!(f, "bad argument `{argument}`: {message}")
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<ScenarioError> for CliError {
    fn from(err: ScenarioError) -> Self {
        match err {
            ScenarioError::Design(design) => CliError::Design(design),
            other => CliError::Scenario(other),
        }
    }
}

impl From<DesignError> for CliError {
    fn from(err: DesignError) -> Self {
        CliError::Design(err)
    }
}

/// Process exit code for an error class.
///
/// 0 success, 2 usage (from clap), 3 scenario/config error, 4 gain design
/// error, 5 simulation diverged, 6 output I/O error.
pub fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Read { .. }
        | CliError::Parse { .. }
        | CliError::Invalid { .. }
        | CliError::Scenario(_)
        | CliError::BadArgument { .. } => 3,
        CliError::Design(_) => 4,
        CliError::Diverged => 5,
        CliError::Write { .. } => 6,
    }
}
