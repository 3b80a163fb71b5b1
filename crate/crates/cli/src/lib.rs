//! Library side of the benchmark tool: configuration, mesh preparation,
//! the benchmark matrix runner, and output formatting. The binary in
//! `main.rs` is a thin wrapper over [`app`].

pub mod app;
pub mod config;
pub mod output;
pub mod runner;
pub mod scene;

pub use config::{load_config, BenchmarkConfig};
pub use runner::{run_benchmark, BenchmarkRecord};
pub use scene::{load_normalized, oriented_covariance, place_at_separation};

/// Errors surfaced by the command-line tool, partitioned by exit code:
/// configuration and parsing problems exit with 2, numeric failures with 3.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, flags, or unparseable input files.
    Config(String),
    /// A numeric routine failed; `context` names the offending row or stage.
    Numeric {
        context: String,
        source: probcol::Error,
    },
    /// Output I/O failure.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } | CliError::Io(_) => 3,
        }
    }

    pub(crate) fn numeric(context: impl Into<String>, source: probcol::Error) -> Self {
        CliError::Numeric {
            context: context.into(),
            source,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numeric { context, source } => {
                write!(f, "numeric failure in {context}: {source}")
            }
            CliError::Io(err) => write!(f, "output error: {err}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Numeric { source, .. } => Some(source),
            CliError::Io(err) => Some(err),
            CliError::Config(_) => None,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}
