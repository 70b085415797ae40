// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON channel files: either Kraus operators or an `n²×n²` superoperator
//! matrix in the column-stacking convention.
//!
//! ```json
//! {"schema_version": 1, "n": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```

use std::path::Path;

use depol_core::{Superoperator, C64};
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::spec_file::{parse_matrix, RawMatrix, SCHEMA_VERSION};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    schema_version: u32,
    n: usize,
    #[serde(default)]
    kraus: Option<Vec<RawMatrix>>,
    #[serde(default)]
    superoperator: Option<RawMatrix>,
}

pub fn load_channel(path: &Path) -> CliResult<Superoperator> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_channel(path, &text)
}

pub fn parse_channel(path: &Path, text: &str) -> CliResult<Superoperator> {
    let raw: RawChannel = serde_json::from_str(text).map_err(|e| CliError::parse(path, e))?;
    let bad = |field: String, msg: String| CliError::invalid(path, field, msg);
    if raw.schema_version != SCHEMA_VERSION {
        return Err(bad(
            "schema_version".into(),
            format!("expected {SCHEMA_VERSION}, got {}", raw.schema_version),
        ));
    }
    let n = raw.n;
    if !(2..=depol_core::linalg::MAX_DIM).contains(&n) {
        return Err(bad("n".into(), format!("must be in 2..={}, got {n}", depol_core::linalg::MAX_DIM)));
    }
    match (raw.kraus, raw.superoperator) {
        (Some(kraus), None) => {
            if kraus.is_empty() {
                return Err(bad("kraus".into(), "needs at least one operator".into()));
            }
            let ops = kraus
                .iter()
                .enumerate()
                .map(|(k, m)| parse_matrix(m, n).map_err(|(f, msg)| bad(format!("kraus[{k}]{f}"), msg)))
                .collect::<CliResult<Vec<_>>>()?;
            Superoperator::from_kraus(&ops).map_err(|e| bad("kraus".into(), e.to_string()))
        }
        (None, Some(rows)) => {
            let nn = n * n;
            if rows.len() != nn {
                return Err(bad("superoperator".into(), format!("expected {nn} rows, got {}", rows.len())));
            }
            let mut m = DMatrix::<C64>::zeros(nn, nn);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != nn {
                    return Err(bad(
                        format!("superoperator[{i}]"),
                        format!("expected {nn} entries, got {}", row.len()),
                    ));
                }
                for (j, [re, im]) in row.iter().enumerate() {
                    if !re.is_finite() || !im.is_finite() {
                        return Err(bad(format!("superoperator[{i}][{j}]"), "entries must be finite".into()));
                    }
                    m[(i, j)] = C64::new(*re, *im);
                }
            }
            Superoperator::from_matrix(n, m).map_err(|e| bad("superoperator".into(), e.to_string()))
        }
        _ => Err(bad(
            "kraus".into(),
            "exactly one of `kraus` and `superoperator` must be given".into(),
        )),
    }
}
