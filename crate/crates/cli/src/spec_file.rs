// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON spec files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "n": 2,
//!   "gamma": 1.0,
//!   "p": 0.0,
//!   "lambda": 0.05,
//!   "H": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.5, 0.0]]],
//!   "jumps": [[[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]],
//!   "grid": {"t0": 0.0, "t1": 1.0, "points": 11},
//!   "seed": 7,
//!   "mc_samples": 10000
//! }
//! ```
//!
//! Complex entries are `[re, im]` pairs and matrices are lists of rows.

use std::path::{Path, PathBuf};

use depol_core::gksl::{gauge_normalize, GkslSpec};
use depol_core::{Error as CoreError, Operator, C64};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub(crate) type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t0: f64,
    t1: f64,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    schema_version: u32,
    n: usize,
    gamma: f64,
    p: f64,
    lambda: f64,
    #[serde(rename = "H")]
    h: RawMatrix,
    #[serde(default)]
    jumps: Vec<RawMatrix>,
    grid: RawGrid,
    seed: u64,
    #[serde(default)]
    mc_samples: Option<usize>,
}

/// Uniform time grid `t0, …, t1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub t0: f64,
    pub t1: f64,
    pub points: usize,
}

impl Grid {
    pub fn times(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == last {
                    self.t1
                } else {
                    self.t0 + (self.t1 - self.t0) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// A validated spec file. The GKSL data is gauge-normalized.
#[derive(Clone, Debug)]
pub struct SpecFile {
    pub path: PathBuf,
    pub spec: GkslSpec,
    pub grid: Grid,
    pub seed: u64,
    pub mc_samples: Option<usize>,
    /// Whether the jump operators had to be shifted to traceless form.
    pub gauge_shifted: bool,
}

impl SpecFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> CliResult<Self> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| CliError::parse(path, e))?;
        let bad = |field: &str, msg: String| CliError::invalid(path, field, msg);

        if raw.schema_version != SCHEMA_VERSION {
            return Err(bad(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", raw.schema_version),
            ));
        }
        let n = raw.n;
        if !(2..=depol_core::linalg::MAX_DIM).contains(&n) {
            return Err(bad("n", format!("must be in 2..={}, got {n}", depol_core::linalg::MAX_DIM)));
        }
        for (field, value) in [("gamma", raw.gamma), ("p", raw.p), ("lambda", raw.lambda)] {
            if !value.is_finite() {
                return Err(bad(field, "must be finite".into()));
            }
        }
        let h = parse_matrix(&raw.h, n).map_err(|(f, m)| bad(&format!("H{f}"), m))?;
        let jumps = raw
            .jumps
            .iter()
            .enumerate()
            .map(|(j, m)| parse_matrix(m, n).map_err(|(f, msg)| bad(&format!("jumps[{j}]{f}"), msg)))
            .collect::<CliResult<Vec<_>>>()?;

        let g = &raw.grid;
        if !g.t0.is_finite() || !g.t1.is_finite() {
            return Err(bad("grid", "t0 and t1 must be finite".into()));
        }
        if g.t1 <= g.t0 {
            return Err(bad("grid.t1", format!("must exceed t0 = {}", g.t0)));
        }
        if g.points < 2 {
            return Err(bad("grid.points", format!("must be at least 2, got {}", g.points)));
        }
        if raw.mc_samples == Some(0) {
            return Err(bad("mc_samples", "must be at least 1".into()));
        }

        let spec = GkslSpec::new(h, jumps, raw.lambda, raw.gamma, raw.p).map_err(|e| match e {
            CoreError::NotHermitian { residual } => {
                bad("H", format!("not Hermitian (residual {residual:e})"))
            }
            CoreError::InvalidParameter(msg) => {
                let field = ["gamma", "lambda", "p"]
                    .into_iter()
                    .find(|f| msg.starts_with(f))
                    .unwrap_or("spec");
                bad(field, msg)
            }
            other => bad("spec", other.to_string()),
        })?;
        let gauge_shifted = !spec.is_gauge_normalized();
        let spec = if gauge_shifted {
            gauge_normalize(&spec).map_err(|e| bad("jumps", e.to_string()))?
        } else {
            spec
        };
        Ok(Self {
            path: path.to_path_buf(),
            spec,
            grid: Grid {
                t0: g.t0,
                t1: g.t1,
                points: g.points,
            },
            seed: raw.seed,
            mc_samples: raw.mc_samples,
            gauge_shifted,
        })
    }
}

/// Converts rows of `[re, im]` pairs into an `n×n` operator. Errors carry an
/// index suffix such as `[1][0]`.
pub(crate) fn parse_matrix(rows: &RawMatrix, n: usize) -> Result<Operator, (String, String)> {
    if rows.len() != n {
        return Err((String::new(), format!("expected {n} rows, got {}", rows.len())));
    }
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err((format!("[{i}]"), format!("expected {n} entries, got {}", row.len())));
        }
        let mut parsed = Vec::with_capacity(n);
        for (j, [re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err((format!("[{i}][{j}]"), "entries must be finite".into()));
            }
            parsed.push(C64::new(*re, *im));
        }
        out.push(parsed);
    }
    Operator::from_rows(&out).map_err(|e| (String::new(), e.to_string()))
}
