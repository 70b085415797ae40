// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! `verify` suites. Every check records an observed value and its bounds;
//! random inputs are drawn from a ChaCha8 stream seeded by the run seed.

use std::fmt;
use std::str::FromStr;

use depol_core::cumulant::{cumulant_generator_k, depolarization_rate, second_order_generator_quadrature};
use depol_core::dynamics::{default_rate_step, exact_p, exact_rate, free_propagator, full_propagator};
use depol_core::gksl::{analytic_traces, build_free_liouvillian, build_full_liouvillian, build_interaction_liouvillian};
use depol_core::linalg::sop_trace;
use depol_core::random::{random_trace_annihilating, random_trace_preserving};
use depol_core::twirl::{lambda_p, project, project_generator};
use depol_core::{Superoperator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::Output;
use crate::table::{num, opt, Csv};
use crate::error::{CliError, CliResult};
use crate::spec_file::SpecFile;

/// Default bound for exact algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Random superoperator pairs per algebraic identity.
const PAIRS: usize = 20;
/// Simpson panels for the quadrature check.
const QUADRATURE_PANELS: usize = 256;
const HALVING_LAMBDAS: [f64; 3] = [0.08, 0.04, 0.02];
const HALVING_RANGE: (f64, f64) = (6.5, 9.5);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Rate,
    All,
}

impl FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "rate" => Ok(Suite::Rate),
            "all" => Ok(Suite::All),
            other => Err(CliError::Usage(format!(
                "unknown suite `{other}` (expected algebra, rate or all)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Algebra => "algebra",
            Suite::Rate => "rate",
            Suite::All => "all",
        })
    }
}

/// One checked property. A missing bound is unbounded on that side;
/// `strict` makes the lower bound exclusive.
#[derive(Clone, Debug)]
pub struct Check {
    pub property: &'static str,
    pub suite: &'static str,
    pub observed: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub strict: bool,
}

impl Check {
    fn at_most(suite: &'static str, property: &'static str, observed: f64, bound: f64) -> Self {
        Self {
            property,
            suite,
            observed,
            lower: None,
            upper: Some(bound),
            strict: false,
        }
    }

    fn within(suite: &'static str, property: &'static str, observed: f64, lo: f64, hi: f64) -> Self {
        Self {
            property,
            suite,
            observed,
            lower: Some(lo),
            upper: Some(hi),
            strict: false,
        }
    }

    pub fn passed(&self) -> bool {
        if !self.observed.is_finite() {
            return false;
        }
        let lower_ok = match self.lower {
            Some(lo) if self.strict => self.observed > lo,
            Some(lo) => self.observed >= lo,
            None => true,
        };
        lower_ok && self.upper.is_none_or(|hi| self.observed <= hi)
    }

    fn describe(&self) -> String {
        let bound = match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
            (Some(lo), None) if self.strict => format!("> {lo}"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, Some(hi)) => format!("<= {hi:e}"),
            (None, None) => "unbounded".to_string(),
        };
        let status = if self.passed() { "PASS" } else { "FAIL" };
        format!(
            "{status} {}/{}: observed {:.6e}, required {bound}",
            self.suite, self.property, self.observed
        )
    }
}

/// Maximum that propagates NaN, so a failed evaluation fails the check.
fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |acc, x| if acc.is_nan() || x.is_nan() { f64::NAN } else { acc.max(x) })
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn random_p(n: usize, rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0 / (n * n - 1) as f64..1.0)
}

/// Depolarizing-family identities on random trace-preserving inputs.
pub fn algebra_checks(spec: &SpecFile, seed: u64, tol: f64) -> CliResult<Vec<Check>> {
    const S: &str = "algebra";
    let n = spec.spec.dim();
    let nn = (n * n) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut err = [0.0f64; 8];
    for _ in 0..PAIRS {
        let phi = random_trace_preserving(n, &mut rng);
        let psi = random_trace_preserving(n, &mut rng);
        let (p, q) = (random_p(n, &mut rng), random_p(n, &mut rng));
        let (lp, lq) = (lambda_p(n, c(p)), lambda_p(n, c(q)));
        let (pphi, ppsi) = (project(&phi), project(&psi));
        let prod = &pphi * &ppsi;
        let p_phi = (sop_trace(&phi) - c(1.0)) / c(nn - 1.0);
        let errors = [
            pphi.distance(&lambda_p(n, p_phi)),
            project(&lp).distance(&lp),
            (&lp * &lq).distance(&lambda_p(n, c(p * q))),
            project(&(&lp * &phi)).distance(&(&lp * &pphi)),
            project(&(&phi * &lp)).distance(&(&pphi * &lp)),
            project(&(&pphi * &psi)).distance(&prod),
            project(&(&phi * &ppsi)).distance(&prod),
            prod.distance(&(&ppsi * &pphi)),
        ];
        for (acc, e) in err.iter_mut().zip(errors) {
            *acc = acc.max(e);
        }
    }
    let mut checks = vec![
        Check::at_most(S, "projector_closed_form", err[0], tol.max(1e-11)),
        Check::at_most(S, "stationarity", err[1], tol),
        Check::at_most(S, "semigroup", err[2], tol),
        Check::at_most(S, "left_commutation", err[3], tol),
        Check::at_most(S, "right_commutation", err[4], tol),
        Check::at_most(S, "absorbing_left", err[5], tol),
        Check::at_most(S, "absorbing_right", err[6], tol),
        Check::at_most(S, "projection_commutativity", err[7], tol),
    ];

    let collapse = max_of((0..PAIRS).map(|_| {
        let l = random_trace_annihilating(n, &mut rng);
        let expected = &Superoperator::traceless_projector(n) * (sop_trace(&l) / c(nn - 1.0));
        project_generator(&l).map(|g| g.distance(&expected)).unwrap_or(f64::NAN)
    }));
    checks.push(Check::at_most(S, "generator_collapse", collapse, tol));

    let l0 = build_free_liouvillian(&spec.spec);
    let times = spec.grid.times();
    let free = max_of(
        times
            .iter()
            .map(|&t| l0.exp(t - spec.grid.t0).map(|e| e.distance(&free_propagator(&spec.spec, t, spec.grid.t0))))
            .collect::<Result<Vec<_>, _>>()?,
    );
    checks.push(Check::at_most(S, "free_closed_form", free, 1e-10));

    let min_choi = [0.1, 1.0, 10.0]
        .into_iter()
        .map(|t| l0.exp(t).map(|e| e.min_choi_eigenvalue()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    checks.push(Check {
        property: "free_complete_positivity",
        suite: S,
        observed: min_choi,
        lower: Some(-1e-12),
        upper: None,
        strict: false,
    });

    let commutation = max_of((0..PAIRS).map(|_| {
        let phi = random_trace_preserving(n, &mut rng);
        let u = free_propagator(&spec.spec, rng.random_range(0.0..2.0), 0.0);
        let pphi = project(&phi);
        project(&(&u * &phi))
            .distance(&(&u * &pphi))
            .max(project(&(&phi * &u)).distance(&(&pphi * &u)))
    }));
    checks.push(Check::at_most(S, "commutation_assumption", commutation, 1e-11));

    let li = build_interaction_liouvillian(&spec.spec);
    let traces = analytic_traces(&spec.spec)?;
    let oracle1 = sop_trace(&li).re / nn;
    let oracle2 = sop_trace(&(&li * &li)).re / nn;
    // relative to the oracle, or to the natural size ‖ℒ_I‖^k/n^k when it vanishes
    let size = li.frobenius_norm() / n as f64;
    let rel = |a: f64, b: f64, scale: f64| {
        let denom = b.abs().max(scale);
        if denom == 0.0 { (a - b).abs() } else { (a - b).abs() / denom }
    };
    checks.push(Check::at_most(
        S,
        "trace_identity_first",
        rel(traces.tr_li_over_n2, oracle1, 1e-3 * size),
        1e-11,
    ));
    checks.push(Check::at_most(
        S,
        "trace_identity_second",
        rel(traces.tr_li2_over_n2, oracle2, 1e-3 * size * size),
        1e-11,
    ));

    let (t0, t1) = (spec.grid.t0, spec.grid.t1);
    let phi = full_propagator(&spec.spec, t1, t0)?;
    let p = exact_p(&spec.spec, t1, t0)?;
    checks.push(Check::at_most(
        S,
        "projected_propagator_depolarizing",
        project(&phi).distance(&lambda_p(n, c(p))),
        1e-11,
    ));
    Ok(checks)
}

/// `−ṗ/p` from `ṗ = tr(ℒ e^{ℒτ})/(n²−1)`, for checking the finite-difference rate.
fn analytic_exact_rate(spec: &depol_core::gksl::GkslSpec, tau: f64) -> CliResult<f64> {
    let l = build_full_liouvillian(spec);
    let e = l.exp(tau)?;
    Ok(-sop_trace(&(&l * &e)).re / (sop_trace(&e).re - 1.0))
}

/// Perturbative-rate checks on the spec's own `H` and jumps.
pub fn rate_checks(spec: &SpecFile) -> CliResult<(Vec<Check>, Vec<String>)> {
    const S: &str = "rate";
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let (t0, t1) = (spec.grid.t0, spec.grid.t1);
    let s = &spec.spec;

    if s.lambda() > 0.0 {
        let fd = exact_rate(s, t1, t0, default_rate_step(s))?;
        let analytic = analytic_exact_rate(s, t1 - t0)?;
        checks.push(Check::at_most(
            S,
            "exact_rate_finite_difference",
            (fd - analytic).abs() / analytic.abs().max(1.0),
            1e-8,
        ));
    } else {
        notes.push("lambda = 0: finite-difference rate check skipped".into());
    }

    let tau = 0.5 / s.free_rate();
    let residuals = HALVING_LAMBDAS
        .iter()
        .map(|&lam| {
            let sl = s.with_lambda(lam)?;
            let exact = exact_rate(&sl, t0 + tau, t0, default_rate_step(&sl))?;
            Ok((exact - depolarization_rate(&sl, t0 + tau, t0)?.total()).abs())
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let (lo, hi) = HALVING_RANGE;
    checks.push(Check::within(S, "lambda_halving_ratio_1", residuals[0] / residuals[1], lo, hi));
    checks.push(Check::within(S, "lambda_halving_ratio_2", residuals[1] / residuals[2], lo, hi));

    let li = build_interaction_liouvillian(s);
    let l0 = build_free_liouvillian(s);
    let quad = second_order_generator_quadrature(&l0, &li, t1, t0, QUADRATURE_PANELS)?;
    let closed = cumulant_generator_k(&li, 2, t1, t0)?.generator;
    checks.push(Check::at_most(S, "second_order_quadrature", quad.distance(&closed), 1e-8));

    let unit = s.with_lambda(1.0)?;
    match depolarization_rate(&unit, t1, t0)?.first_correction() {
        Some(first) => checks.push(Check {
            property: "first_correction_positive",
            suite: S,
            observed: first,
            lower: Some(0.0),
            upper: None,
            strict: true,
        }),
        None => notes.push("interaction vanishes: positivity check skipped".into()),
    }
    Ok((checks, notes))
}

/// Runs the selected suites and renders the CSV report.
pub fn verify_cmd(spec: &SpecFile, suite: Suite, seed: u64, tol: Option<f64>) -> CliResult<Output> {
    let tol = tol.unwrap_or(ALGEBRA_TOL);
    let mut checks = Vec::new();
    let mut messages = Vec::new();
    if matches!(suite, Suite::Algebra | Suite::All) {
        checks.extend(algebra_checks(spec, seed, tol)?);
    }
    if matches!(suite, Suite::Rate | Suite::All) {
        let (rate, notes) = rate_checks(spec)?;
        checks.extend(rate);
        messages.extend(notes);
    }
    let mut csv = Csv::new(&["property", "suite", "observed", "lower", "upper", "status"]);
    let mut failed = 0;
    for check in &checks {
        let pass = check.passed();
        failed += usize::from(!pass);
        csv.push(vec![
            check.property.to_string(),
            check.suite.to_string(),
            num(check.observed),
            opt(check.lower),
            opt(check.upper),
            if pass { "PASS" } else { "FAIL" }.to_string(),
        ]);
        messages.push(check.describe());
    }
    messages.push(format!(
        "{} of {} properties passed",
        checks.len() - failed,
        checks.len()
    ));
    Ok(Output {
        body: csv.render(),
        messages,
        failed: failed > 0,
    })
}
