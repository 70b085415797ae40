// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Exit code for a failed property check.
pub const EXIT_FAILURE: u8 = 1;
/// Exit code for unreadable or invalid input.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}: field `{field}`: {message}", path.display())]
    Invalid {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("computation failed: {0}")]
    Compute(#[from] depol_core::Error),
    #[error("writing output: {0}")]
    Output(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Invalid { .. } | CliError::Usage(_) => {
                EXIT_INPUT
            }
            CliError::Compute(_) | CliError::Output(_) => EXIT_FAILURE,
        }
    }

    pub(crate) fn parse(path: &std::path::Path, err: serde_json::Error) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    pub(crate) fn invalid(path: &std::path::Path, field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Invalid {
            path: path.to_path_buf(),
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
