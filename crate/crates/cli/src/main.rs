// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use depol_cli::error::{CliError, EXIT_FAILURE, EXIT_INPUT};
use depol_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    for line in &output.messages {
        eprintln!("{line}");
    }
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, &output.body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(output.body.as_bytes())
            .map_err(CliError::Output),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(match e {
            CliError::Io { .. } => EXIT_INPUT,
            _ => EXIT_FAILURE,
        });
    }
    if output.failed {
        ExitCode::from(EXIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    }
}
