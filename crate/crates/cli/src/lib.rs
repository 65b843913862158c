//! Command-line front end for the bellnorm studies: configuration parsing,
//! execution and persistence of record streams and plot tables.

mod config;
mod runner;

pub use config::{list_experiments, parse_config, serialize_config, RunConfig};
pub use runner::{output_paths, run, OutputPaths, RunReport, OUTPUT_DIR_ENV};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Study(#[from] bellnorm_core::Error),
}

impl CliError {
    /// 1 for configuration problems, 3 for I/O. Check failures are not
    /// errors and map to 2 in the binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            _ => 1,
        }
    }
}
