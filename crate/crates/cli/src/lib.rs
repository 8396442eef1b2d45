//! Library side of the `barnorm` command: problem files, algorithm dispatch,
//! reports and CSV/SVG output.

pub mod csv;
pub mod dispatch;
pub mod problem;
pub mod report;
pub mod svg;

use std::path::PathBuf;

pub use dispatch::dispatch;
pub use problem::{load_problem, parse_problem, Algorithm, Problem};
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Input { path: PathBuf, source: std::io::Error },
    #[error("parse error at `{path}` (line {line}, column {column}): {msg}")]
    Parse { path: String, line: usize, column: usize, msg: String },
    #[error("invalid field `{path}`: {msg}")]
    Schema { path: String, msg: String },
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] barnorm::Error),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } | CliError::Parse { .. } | CliError::Schema { .. } => 4,
            CliError::Core(barnorm::Error::Reducible { .. }) => 3,
            CliError::Core(barnorm::Error::Internal(_)) => 5,
            CliError::Core(_) => 4,
            CliError::Output { .. } | CliError::Inconsistent(_) => 5,
        }
    }
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}
