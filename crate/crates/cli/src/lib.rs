// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for `depol_core`.
//!
//! Subcommands read a JSON spec file (see [`spec_file`]), validate it
//! completely and only then compute. Results are CSV on stdout or `--out`;
//! diagnostics go to stderr. Exit codes: 0 success, 1 property failure,
//! 2 input error.

pub mod channel_file;
pub mod commands;
pub mod error;
pub mod spec_file;
pub mod table;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use depol_core::linalg::DEFAULT_TOL;

pub use commands::Output;
pub use error::{CliError, CliResult};

use commands::{
    parse_lambda_list, project_cmd, rate_cmd, spec_channel, sweep_cmd, twirl_mc_cmd, DEFAULT_MC_SAMPLES,
};
use spec_file::SpecFile;
use verify::{verify_cmd, Suite};

#[derive(Debug, Parser)]
#[command(name = "depol", version, about = "Depolarization rates of GKSL dynamics under unitary twirling")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Spec file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the spec file.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Tolerance for channel checks (`project`) or algebraic identities (`verify`).
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project a channel onto the depolarizing family.
    Project {
        /// Channel file (JSON); defaults to the spec's propagator from t0 to t1.
        #[arg(long, value_name = "FILE")]
        channel_matrix: Option<PathBuf>,
        /// Compare against a Monte-Carlo twirl.
        #[arg(long)]
        mc_check: bool,
        /// Monte-Carlo sample count (default: spec `mc_samples`, else 10000)
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
    },
    /// Exact and perturbative depolarization rates on the spec grid.
    Rate,
    /// Rate residual at t1 for a decreasing list of couplings.
    Sweep {
        #[arg(long, value_name = "CSV")]
        lambda_list: String,
    },
    /// Monte-Carlo twirl error at N/100, N/10 and N samples.
    TwirlMc {
        /// Largest sample count (default: spec `mc_samples`, else 10000)
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
        /// Channel file (JSON); defaults to the spec's propagator from t0 to t1.
        #[arg(long, value_name = "FILE")]
        channel_matrix: Option<PathBuf>,
    },
    /// Run invariant suites and report each property.
    Verify {
        #[arg(long, value_name = "NAME", default_value = "all")]
        suite: String,
    },
}

fn require_spec(common: &Common) -> CliResult<SpecFile> {
    let path = common
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Usage("--spec FILE is required".into()))?;
    SpecFile::load(path)
}

fn check_tol(tol: Option<f64>) -> CliResult<Option<f64>> {
    match tol {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(CliError::Usage(format!("--tol must be >= 0, got {t}"))),
        other => Ok(other),
    }
}

fn gauge_note(spec: &SpecFile) -> Option<String> {
    spec.gauge_shifted.then(|| {
        format!(
            "{}: jump operators shifted to traceless form (H adjusted accordingly)",
            spec.path.display()
        )
    })
}

/// Loads and validates every input, then runs the subcommand.
pub fn run(cli: &Cli) -> CliResult<Output> {
    let common = &cli.common;
    let tol = check_tol(common.tol)?;
    let mut notes = Vec::new();
    let mut output = match &cli.command {
        Command::Project {
            channel_matrix,
            mc_check,
            samples,
        } => {
            let spec = match (&common.spec, channel_matrix) {
                (None, Some(_)) => None,
                _ => Some(require_spec(common)?),
            };
            let channel = channel_matrix
                .as_deref()
                .map(channel_file::load_channel)
                .transpose()?;
            if samples == &Some(0) {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            notes.extend(spec.as_ref().and_then(gauge_note));
            let phi = match channel {
                Some(phi) => phi,
                None => spec_channel(spec.as_ref().expect("spec loaded"))?,
            };
            let mc = mc_check.then(|| {
                let n = samples
                    .or(spec.as_ref().and_then(|s| s.mc_samples))
                    .unwrap_or(DEFAULT_MC_SAMPLES);
                let seed = common.seed.or(spec.as_ref().map(|s| s.seed)).unwrap_or(0);
                (n, seed)
            });
            project_cmd(&phi, tol.unwrap_or(DEFAULT_TOL), mc)?
        }
        Command::Rate => {
            let spec = require_spec(common)?;
            notes.extend(gauge_note(&spec));
            rate_cmd(&spec)?
        }
        Command::Sweep { lambda_list } => {
            let spec = require_spec(common)?;
            let lambdas = parse_lambda_list(lambda_list)?;
            notes.extend(gauge_note(&spec));
            sweep_cmd(&spec, &lambdas)?
        }
        Command::TwirlMc {
            samples,
            channel_matrix,
        } => {
            let spec = require_spec(common)?;
            let channel = channel_matrix
                .as_deref()
                .map(channel_file::load_channel)
                .transpose()?;
            let n = samples.or(spec.mc_samples).unwrap_or(DEFAULT_MC_SAMPLES);
            if n == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            notes.extend(gauge_note(&spec));
            let phi = match channel {
                Some(phi) => phi,
                None => spec_channel(&spec)?,
            };
            twirl_mc_cmd(&phi, n, common.seed.unwrap_or(spec.seed))?
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let spec = require_spec(common)?;
            notes.extend(gauge_note(&spec));
            verify_cmd(&spec, suite, common.seed.unwrap_or(spec.seed), tol)?
        }
    };
    notes.append(&mut output.messages);
    output.messages = notes;
    Ok(output)
}
