// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact propagators and the projected depolarizing trajectory.
//!
//! The generator `ℒ₀ + λℒ_I` is time independent, so the propagator is a
//! single matrix exponential. Its twirl is `Λ_{p(t)}` with
//! `p(t) = (tr Φ(t,t₀) − 1)/(n²−1)`, and the projected master equation
//! reduces to the scalar ODE `ṗ = −γ̃_λ(t) p`.

use rayon::prelude::*;

use crate::cumulant::{depolarization_rate, ProjectedPowers, RateReport, MAX_ORDER};
use crate::error::{Error, Result};
use crate::gksl::{build_full_liouvillian, build_interaction_liouvillian, GkslSpec};
use crate::linalg::{sop_trace, Superoperator, C64};
use crate::parallel;
use crate::twirl::lambda_p;

/// Smallest `|p|` for which `ln |p|` is differentiated.
pub const MIN_RESOLVABLE_P: f64 = 1e-8;

/// Projected trajectory `p(t)` on a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t0: f64,
    pub time_grid: Vec<f64>,
    pub p_values: Vec<f64>,
    pub propagators: Option<Vec<Superoperator>>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `e^{ℒ₀(t−t₀)} = Λ_{e^{−(1−p)γ(t−t₀)}}`.
pub fn free_propagator(spec: &GkslSpec, t: f64, t0: f64) -> Superoperator {
    let q = (-spec.free_rate() * (t - t0)).exp();
    lambda_p(spec.dim(), C64::new(q, 0.0))
}

/// `Φ(t, t₀) = e^{(ℒ₀ + λℒ_I)(t−t₀)}`.
pub fn full_propagator(spec: &GkslSpec, t: f64, t0: f64) -> Result<Superoperator> {
    if spec.lambda() == 0.0 {
        return Ok(free_propagator(spec, t, t0));
    }
    build_full_liouvillian(spec).exp(t - t0)
}

/// `p(t) = (tr Φ(t,t₀) − 1)/(n²−1)` from the exact propagator.
pub fn exact_p(spec: &GkslSpec, t: f64, t0: f64) -> Result<f64> {
    let nn = (spec.dim() * spec.dim()) as f64;
    Ok(p_from_propagator(&full_propagator(spec, t, t0)?, nn))
}

fn p_from_propagator(phi: &Superoperator, nn: f64) -> f64 {
    (sop_trace(phi).re - 1.0) / (nn - 1.0)
}

/// Exact `p(t)` on a grid whose first point is `t₀`.
pub fn exact_p_trajectory(spec: &GkslSpec, time_grid: &[f64]) -> Result<Trajectory> {
    exact_trajectory(spec, time_grid, false)
}

/// [`exact_p_trajectory`], optionally keeping the propagators.
pub fn exact_trajectory(spec: &GkslSpec, time_grid: &[f64], keep_propagators: bool) -> Result<Trajectory> {
    check_grid(time_grid)?;
    let t0 = time_grid[0];
    let nn = (spec.dim() * spec.dim()) as f64;
    let generator = build_full_liouvillian(spec);
    let props: Vec<Superoperator> = parallel::pool().install(|| {
        time_grid
            .par_iter()
            .map(|&t| {
                if t == t0 {
                    Ok(Superoperator::identity(spec.dim()))
                } else if spec.lambda() == 0.0 {
                    Ok(free_propagator(spec, t, t0))
                } else {
                    generator.exp(t - t0)
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let p_values = props.iter().map(|phi| p_from_propagator(phi, nn)).collect();
    Ok(Trajectory {
        t0,
        time_grid: time_grid.to_vec(),
        p_values,
        propagators: keep_propagators.then_some(props),
    })
}

/// Finite-difference step used by [`exact_rate`] when none is given:
/// `10⁻³` of the free depolarization time, capped at `10⁻³`.
pub fn default_rate_step(spec: &GkslSpec) -> f64 {
    1e-3 / spec.free_rate().max(1.0)
}

/// Exact instantaneous rate `−d ln p/dt` at `t`.
///
/// Central differences with steps `dt` and `dt/2` are combined by Richardson
/// extrapolation. Fails with [`Error::UnresolvableRate`] when `|p|` drops
/// below [`MIN_RESOLVABLE_P`] or changes sign inside the stencil.
/// For `λ = 0` the propagator is `Λ_{e^{−(1−p)γ(t−t₀)}}` and the rate is
/// returned exactly.
pub fn exact_rate(spec: &GkslSpec, t: f64, t0: f64, dt: f64) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {dt}")));
    }
    if spec.lambda() == 0.0 {
        return Ok(spec.free_rate());
    }
    let generator = build_full_liouvillian(spec);
    let nn = (spec.dim() * spec.dim()) as f64;
    let offsets = [-dt, -0.5 * dt, 0.5 * dt, dt];
    let mut logs = [0.0; 4];
    let mut sign = 0.0;
    for (slot, off) in logs.iter_mut().zip(offsets) {
        let p = p_from_propagator(&generator.exp(t + off - t0)?, nn);
        if p.abs() <= MIN_RESOLVABLE_P || (sign != 0.0 && p.signum() != sign) {
            return Err(Error::UnresolvableRate { p });
        }
        sign = p.signum();
        *slot = p.abs().ln();
    }
    let coarse = (logs[3] - logs[0]) / (2.0 * dt);
    let fine = (logs[2] - logs[1]) / dt;
    Ok(-(4.0 * fine - coarse) / 3.0)
}

/// Perturbative and exact rates along `time_grid` (first point is `t₀`).
pub fn rate_report(spec: &GkslSpec, time_grid: &[f64]) -> Result<RateReport> {
    check_grid(time_grid)?;
    let t0 = time_grid[0];
    let dt = default_rate_step(spec);
    let mut orders = Vec::with_capacity(time_grid.len());
    for &t in time_grid {
        orders.push(depolarization_rate(spec, t, t0)?);
    }
    let exact: Vec<Option<f64>> = parallel::pool().install(|| {
        time_grid
            .par_iter()
            .map(|&t| match exact_rate(spec, t, t0, dt) {
                Ok(r) => Ok(Some(r)),
                Err(Error::UnresolvableRate { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let residual = exact
        .iter()
        .zip(&orders)
        .map(|(e, o)| e.map(|e| e - o.total()))
        .collect();
    Ok(RateReport {
        time_grid: time_grid.to_vec(),
        gamma_tilde_orders: orders,
        gamma_exact: exact,
        residual,
    })
}

/// Solves `ṗ = −γ̃_λ(t) p`, `p(t₀) = 1`, with `γ̃` truncated at `λ^{max_order}`.
///
/// The truncated rate is a polynomial in `t − t₀`, so `∫γ̃` is evaluated in
/// closed form. Orders up to two take the rate from the chaotic-state trace
/// identities; higher orders from the cumulant series.
pub fn solve_projected_ode(spec: &GkslSpec, time_grid: &[f64], max_order: usize) -> Result<Trajectory> {
    check_grid(time_grid)?;
    if max_order > MAX_ORDER {
        return Err(Error::OrderOutOfRange {
            order: max_order,
            max: MAX_ORDER,
        });
    }
    let t0 = time_grid[0];
    let lambda = spec.lambda();
    // ∫₀^τ γ̃ = Σ_k a_k τ^k
    let mut integral_coefficients = vec![0.0; max_order.max(2) + 1];
    integral_coefficients[1] = spec.free_rate();
    if max_order > 0 && lambda != 0.0 {
        if max_order <= 2 {
            let unit = depolarization_rate(spec, t0 + 1.0, t0)?;
            integral_coefficients[1] += unit.order1;
            if max_order == 2 {
                integral_coefficients[2] = 0.5 * unit.order2;
            }
        } else {
            let powers = ProjectedPowers::new(&build_interaction_liouvillian(spec), max_order)?;
            for k in 1..=max_order {
                let c = powers.cumulant_coefficient(k)?.re;
                integral_coefficients[k] -= lambda.powi(k as i32) * c / k as f64;
            }
        }
    }
    let p_values = time_grid
        .iter()
        .map(|&t| {
            let tau = t - t0;
            let integral: f64 = integral_coefficients
                .iter()
                .enumerate()
                .map(|(k, a)| a * tau.powi(k as i32))
                .sum();
            (-integral).exp()
        })
        .collect();
    Ok(Trajectory {
        t0,
        time_grid: time_grid.to_vec(),
        p_values,
        propagators: None,
    })
}

/// Classical RK4 for `ṗ = −rate(t) p`, `p(grid[0]) = 1`, with `substeps`
/// steps between consecutive grid points. For rates without a closed-form
/// integral.
pub fn integrate_rate_rk4(rate: impl Fn(f64) -> f64, time_grid: &[f64], substeps: usize) -> Result<Vec<f64>> {
    check_grid(time_grid)?;
    let substeps = substeps.max(1);
    let f = |t: f64, p: f64| -rate(t) * p;
    let mut p = 1.0;
    let mut out = vec![p];
    for w in time_grid.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        let mut t = w[0];
        for _ in 0..substeps {
            let k1 = f(t, p);
            let k2 = f(t + 0.5 * h, p + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, p + 0.5 * h * k2);
            let k4 = f(t + h, p + h * k3);
            p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gksl::{build_free_liouvillian, gauge_normalize};
    use crate::linalg::{is_trace_preserving, Operator};
    use crate::random::{random_gksl_spec, RandomSpecOptions};
    use crate::twirl::project;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_spec(n: usize, seed: u64, lambda: f64) -> GkslSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = RandomSpecOptions {
            lambda,
            ..Default::default()
        };
        gauge_normalize(&random_gksl_spec(n, &opts, &mut rng).unwrap()).unwrap()
    }

    #[test]
    fn free_propagator_limits() {
        let spec = GkslSpec::new(Operator::zeros(3), vec![], 0.0, 2.0, 0.2).unwrap();
        assert!(free_propagator(&spec, 1.0, 1.0).distance(&Superoperator::identity(3)) < 1e-15);
        let far = 50.0 / spec.free_rate();
        let limit = free_propagator(&spec, far, 0.0);
        assert!(limit.distance(&Superoperator::trace_replace(3)) < 1e-10);
    }

    #[test]
    fn free_propagator_matches_expm() {
        let spec = GkslSpec::new(Operator::zeros(2), vec![], 0.0, 1.3, -0.2).unwrap();
        let l0 = build_free_liouvillian(&spec);
        for i in 0..10 {
            let t = 0.3 * i as f64;
            let closed = free_propagator(&spec, t, 0.0);
            assert!(closed.distance(&l0.exp(t).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn full_propagator_basics() {
        let spec = random_spec(3, 1, 0.2);
        assert!(full_propagator(&spec, 0.4, 0.4).unwrap().distance(&Superoperator::identity(3)) < 1e-15);
        let free = spec.with_lambda(0.0).unwrap();
        assert_eq!(full_propagator(&free, 0.7, 0.0).unwrap(), free_propagator(&free, 0.7, 0.0));
        let a = full_propagator(&spec, 0.5, 0.0).unwrap();
        let b = full_propagator(&spec, 1.2, 0.5).unwrap();
        let c = full_propagator(&spec, 1.2, 0.0).unwrap();
        assert!((&b * &a).distance(&c) < 1e-10);
        assert!(c.is_cptp(1e-9));
    }

    #[test]
    fn trajectory_free_case_and_range() {
        let grid: Vec<f64> = (0..11).map(|i| 0.2 * i as f64).collect();
        let free = random_spec(2, 3, 0.0);
        let traj = exact_p_trajectory(&free, &grid).unwrap();
        for (t, p) in grid.iter().zip(&traj.p_values) {
            assert!((p - (-free.free_rate() * t).exp()).abs() < 1e-12);
        }
        let spec = random_spec(3, 4, 0.3);
        let traj = exact_trajectory(&spec, &grid, true).unwrap();
        assert_eq!(traj.p_values[0], 1.0);
        let lo = -1.0 / 8.0;
        assert!(traj.p_values.iter().all(|&p| p >= lo - 1e-12 && p <= 1.0 + 1e-12));
        // the twirled propagator is exactly Λ_{p(t)}
        for (phi, p) in traj.propagators.unwrap().iter().zip(&traj.p_values) {
            assert!(project(phi).distance(&lambda_p(3, C64::new(*p, 0.0))) < 1e-11);
            assert!(is_trace_preserving(phi, 1e-10));
        }
        assert!(exact_p_trajectory(&spec, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn exact_rate_free_case() {
        let free = random_spec(2, 5, 0.0);
        for t in [0.0, 0.3, 1.0] {
            let r = exact_rate(&free, t, 0.0, default_rate_step(&free)).unwrap();
            assert!((r - free.free_rate()).abs() < 1e-8);
        }
    }

    /// Independent route: `p(t) = e^{−γ₀τ} (tr e^{λℒ_I τ} − 1)/(n²−1)`, so the
    /// exact rate is `γ₀ − λ tr(ℒ_I e^{λℒ_I τ}) / (tr e^{λℒ_I τ} − 1)`.
    #[test]
    fn exact_rate_matches_analytic_derivative() {
        let spec = random_spec(3, 6, 0.15);
        let li = build_interaction_liouvillian(&spec);
        for tau in [0.0, 0.25, 0.8] {
            let e = li.exp(spec.lambda() * tau).unwrap();
            let num = sop_trace(&(&li * &e)).re;
            let den = sop_trace(&e).re - 1.0;
            let expected = spec.free_rate() - spec.lambda() * num / den;
            let got = exact_rate(&spec, 1.0 + tau, 1.0, default_rate_step(&spec)).unwrap();
            assert!((got - expected).abs() < 1e-10, "tau {tau}: {got} vs {expected}");
        }
    }

    #[test]
    fn exact_rate_unresolvable() {
        let spec = GkslSpec::new(Operator::zeros(2), vec![], 0.1, 1.0, 0.0).unwrap();
        assert!(matches!(
            exact_rate(&spec, 40.0, 0.0, 1e-3),
            Err(Error::UnresolvableRate { .. })
        ));
        assert!(exact_rate(&spec, 1.0, 0.0, 0.0).is_err());
        let free = spec.with_lambda(0.0).unwrap();
        assert_eq!(exact_rate(&free, 40.0, 0.0, 1e-3).unwrap(), 1.0);
    }

    #[test]
    fn ode_solution_free_and_first_order() {
        let grid: Vec<f64> = (0..6).map(|i| 0.2 * i as f64).collect();
        let free = random_spec(2, 7, 0.0);
        let traj = solve_projected_ode(&free, &grid, 2).unwrap();
        for (t, p) in grid.iter().zip(&traj.p_values) {
            assert!((p - (-free.free_rate() * t).exp()).abs() < 1e-15);
        }
        let spec = random_spec(2, 8, 0.1);
        let traj = solve_projected_ode(&spec, &grid, 1).unwrap();
        let r = depolarization_rate(&spec, 0.0, 0.0).unwrap();
        for (t, p) in grid.iter().zip(&traj.p_values) {
            assert!((p - (-(r.order0 + r.order1) * t).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn ode_series_orders_agree_with_trace_identities() {
        let grid: Vec<f64> = (0..5).map(|i| 0.25 * i as f64).collect();
        let spec = random_spec(3, 9, 0.05);
        let two = solve_projected_ode(&spec, &grid, 2).unwrap();
        let exact = exact_p_trajectory(&spec, &grid).unwrap();
        let twelve = solve_projected_ode(&spec, &grid, 12).unwrap();
        for i in 0..grid.len() {
            // truncation at λ² leaves an O(λ³) error in ln p
            assert!((two.p_values[i] - exact.p_values[i]).abs() < 1e-3);
            assert!((twelve.p_values[i] - exact.p_values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_matches_closed_form() {
        let grid: Vec<f64> = (0..5).map(|i| 0.25 * i as f64).collect();
        let spec = random_spec(2, 10, 0.2);
        let r = depolarization_rate(&spec, 1.0, 0.0).unwrap();
        let rate = |t: f64| r.order0 + r.order1 + r.order2 * t;
        let rk = integrate_rate_rk4(rate, &grid, 50).unwrap();
        let closed = solve_projected_ode(&spec, &grid, 2).unwrap();
        for (a, b) in rk.iter().zip(&closed.p_values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rate_report_rows() {
        let grid: Vec<f64> = (0..4).map(|i| 0.1 * i as f64).collect();
        let spec = random_spec(2, 11, 0.02);
        let report = rate_report(&spec, &grid).unwrap();
        assert_eq!(report.time_grid.len(), 4);
        for (orders, res) in report.gamma_tilde_orders.iter().zip(&report.residual) {
            assert_eq!(orders.order0, spec.free_rate());
            assert!(res.unwrap().abs() < 1e-4);
        }
    }
}
