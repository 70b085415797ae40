// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Subcommand bodies. Each returns the full CSV text so nothing is written
//! before the computation has succeeded.

use depol_core::cumulant::depolarization_rate;
use depol_core::dynamics::{
    default_rate_step, exact_p_trajectory, exact_rate, full_propagator, rate_report, solve_projected_ode,
};
use depol_core::linalg::is_trace_preserving;
use depol_core::twirl::{entanglement_fidelity, monte_carlo_twirl, p_of, project, DepolarizingParams};
use depol_core::{Error as CoreError, Superoperator};

use crate::table::{num, opt, Csv};
use crate::error::{CliError, CliResult};
use crate::spec_file::SpecFile;

/// Default Monte-Carlo sample count when neither flag nor spec sets one.
pub const DEFAULT_MC_SAMPLES: usize = 10_000;

/// Result of a subcommand: CSV body, diagnostics for stderr, and whether
/// a checked property failed.
#[derive(Clone, Debug, Default)]
pub struct Output {
    pub body: String,
    pub messages: Vec<String>,
    pub failed: bool,
}

/// The channel examined by `project` and `twirl-mc` when no channel file is
/// given: the full propagator from `t0` to `t1`.
pub fn spec_channel(spec: &SpecFile) -> CliResult<Superoperator> {
    Ok(full_propagator(&spec.spec, spec.grid.t1, spec.grid.t0)?)
}

pub fn project_cmd(phi: &Superoperator, tol: f64, mc: Option<(usize, u64)>) -> CliResult<Output> {
    let n = phi.dim();
    let p = p_of(phi);
    let params = DepolarizingParams::new(n, p)?;
    let mut header = vec![
        "n",
        "p_re",
        "p_im",
        "entanglement_fidelity",
        "is_channel",
        "trace_preserving",
    ];
    let mut row = vec![
        n.to_string(),
        num(p.re),
        num(p.im),
        num(entanglement_fidelity(phi)),
        params.is_channel(tol).to_string(),
        is_trace_preserving(phi, tol).to_string(),
    ];
    let mut messages = Vec::new();
    if let Some((samples, seed)) = mc {
        let estimate = monte_carlo_twirl(phi, samples, seed)?;
        let distance = estimate.distance(&project(phi));
        header.extend(["mc_samples", "mc_p", "mc_distance"]);
        row.extend([samples.to_string(), num(p_of(&estimate).re), num(distance)]);
        messages.push(format!(
            "monte-carlo twirl with {samples} samples: distance {distance:.3e}"
        ));
    }
    let mut csv = Csv::new(&header);
    csv.push(row);
    Ok(Output {
        body: csv.render(),
        messages,
        failed: false,
    })
}

pub fn rate_cmd(spec: &SpecFile) -> CliResult<Output> {
    let grid = spec.grid.times();
    let report = rate_report(&spec.spec, &grid)?;
    let exact = exact_p_trajectory(&spec.spec, &grid)?;
    let order2 = solve_projected_ode(&spec.spec, &grid, 2)?;
    let mut csv = Csv::new(&[
        "t",
        "p_exact",
        "p_order2",
        "gamma_exact",
        "gamma_tilde_0",
        "gamma_tilde_1",
        "gamma_tilde_2",
        "residual",
        "status",
    ]);
    let mut unresolved = 0;
    for (i, &t) in grid.iter().enumerate() {
        let orders = report.gamma_tilde_orders[i];
        let status = if report.gamma_exact[i].is_some() {
            "ok"
        } else {
            unresolved += 1;
            "unresolved"
        };
        csv.push(vec![
            num(t),
            num(exact.p_values[i]),
            num(order2.p_values[i]),
            opt(report.gamma_exact[i]),
            num(orders.order0),
            num(orders.order1),
            num(orders.order2),
            opt(report.residual[i]),
            status.to_string(),
        ]);
    }
    let mut messages = Vec::new();
    if unresolved > 0 {
        messages.push(format!(
            "{unresolved} grid point(s) where |p| is too small to resolve the exact rate"
        ));
    }
    Ok(Output {
        body: csv.render(),
        messages,
        failed: false,
    })
}

/// Parses a comma-separated λ list and checks it is non-negative and
/// strictly decreasing.
pub fn parse_lambda_list(text: &str) -> CliResult<Vec<f64>> {
    let values = text
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--lambda-list: `{s}` is not a number")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if values.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(CliError::Usage("--lambda-list: values must be finite and >= 0".into()));
    }
    if values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Usage("--lambda-list: values must be strictly decreasing".into()));
    }
    Ok(values)
}

/// Residual `γ_exact − γ̃_λ` at `t1` for each λ, with the ratio of
/// consecutive absolute residuals.
pub fn sweep_cmd(spec: &SpecFile, lambdas: &[f64]) -> CliResult<Output> {
    let (t0, t) = (spec.grid.t0, spec.grid.t1);
    let mut csv = Csv::new(&["lambda", "t", "gamma_exact", "gamma_tilde", "residual", "ratio"]);
    let mut previous: Option<f64> = None;
    let mut messages = Vec::new();
    for &lambda in lambdas {
        let s = spec.spec.with_lambda(lambda)?;
        let tilde = depolarization_rate(&s, t, t0)?.total();
        let exact = match exact_rate(&s, t, t0, default_rate_step(&s)) {
            Ok(r) => Some(r),
            Err(CoreError::UnresolvableRate { p }) => {
                messages.push(format!("lambda {lambda}: exact rate unresolvable (p = {p:e})"));
                None
            }
            Err(e) => return Err(e.into()),
        };
        let residual = exact.map(|e| e - tilde);
        let ratio = match (previous, residual) {
            (Some(prev), Some(cur)) if cur != 0.0 => Some(prev.abs() / cur.abs()),
            _ => None,
        };
        csv.push(vec![
            num(lambda),
            num(t),
            opt(exact),
            num(tilde),
            opt(residual),
            opt(ratio),
        ]);
        previous = residual;
    }
    Ok(Output {
        body: csv.render(),
        messages,
        failed: false,
    })
}

/// Sample counts `N/100`, `N/10`, `N`, without zeros or repeats.
pub fn checkpoints(samples: usize) -> Vec<usize> {
    let mut out: Vec<usize> = [samples / 100, samples / 10, samples]
        .into_iter()
        .filter(|&k| k > 0)
        .collect();
    out.dedup();
    out
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn twirl_mc_cmd(phi: &Superoperator, samples: usize, seed: u64) -> CliResult<Output> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let exact = project(phi);
    let mut csv = Csv::new(&["samples", "frobenius_distance"]);
    let mut points = Vec::new();
    for k in checkpoints(samples) {
        let d = monte_carlo_twirl(phi, k, seed)?.distance(&exact);
        points.push((k as f64, d));
        csv.push(vec![k.to_string(), num(d)]);
    }
    let message = match log_log_slope(&points) {
        Some(s) => format!("log-log slope of distance vs samples: {s:.4}"),
        None => "log-log slope undefined (fewer than two positive checkpoints)".to_string(),
    };
    Ok(Output {
        body: csv.render(),
        messages: vec![message],
        failed: false,
    })
}
