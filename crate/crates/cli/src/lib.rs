//! Library side of the `clx` command-line tool: argument definitions, graph
//! ingestion, report types and subcommand dispatch.

pub mod args;
pub mod ingest;
pub mod reports;
pub mod run;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("negative message count on line {line}")]
    NegativeCount { line: usize },
    #[error(transparent)]
    Core(#[from] clx_core::Error),
}

/// Structured form written to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: String,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "IoError",
            CliError::Parse(_) => "ParseError",
            CliError::NegativeCount { .. } => "NegativeCount",
            CliError::Core(e) => e.kind(),
        }
    }

    /// 2 for bad input, 1 when the analysis itself fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 1,
            _ => 2,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport { error: self.kind().to_string(), message: self.to_string(), exit_code: self.exit_code() }
    }
}
