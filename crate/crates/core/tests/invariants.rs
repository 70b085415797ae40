// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

use depol_core::cumulant::depolarization_rate;
use depol_core::dynamics::{default_rate_step, exact_p, exact_rate, free_propagator, full_propagator};
use depol_core::gksl::{build_free_liouvillian, build_interaction_liouvillian, gauge_normalize};
use depol_core::linalg::{expm, sandwich, sop_trace, unvec, vec};
use depol_core::random::{
    random_gksl_spec, random_operator, random_trace_preserving, RandomSpecOptions,
};
use depol_core::twirl::{lambda_p, p_of, project};
use depol_core::{Operator, Superoperator, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn depolarizing_algebra_on_random_pairs() {
    let mut r = rng(11);
    for n in 2..=4 {
        for _ in 0..20 {
            let phi = random_trace_preserving(n, &mut r);
            let psi = random_trace_preserving(n, &mut r);
            let lo = -1.0 / (n * n - 1) as f64;
            let p = c(r.random_range(lo..1.0));
            let q = c(r.random_range(lo..1.0));
            let lp = lambda_p(n, p);
            let lq = lambda_p(n, q);

            assert!(project(&lp).distance(&lp) < 1e-12);
            assert!((&lp * &lq).distance(&lambda_p(n, p * q)) < 1e-12);
            let pphi = project(&phi);
            assert!(project(&(&lp * &phi)).distance(&(&lp * &pphi)) < 1e-12);
            assert!(project(&(&phi * &lp)).distance(&(&pphi * &lp)) < 1e-12);
            let ppsi = project(&psi);
            let prod = &pphi * &ppsi;
            assert!(project(&(&pphi * &psi)).distance(&prod) < 1e-12);
            assert!(project(&(&phi * &ppsi)).distance(&prod) < 1e-12);
            assert!(prod.distance(&(&ppsi * &pphi)) < 1e-12);
        }
    }
}

#[test]
fn depolarizing_factors_pull_out_of_projection() {
    let mut r = rng(12);
    for n in 2..=4 {
        for _ in 0..10 {
            let l1 = random_trace_preserving(n, &mut r);
            let l2 = random_trace_preserving(n, &mut r);
            let ps: Vec<f64> = (0..3).map(|_| r.random_range(-0.3..1.0)).collect();
            let sandwiched = &(&(&(&lambda_p(n, c(ps[0])) * &l1) * &lambda_p(n, c(ps[1]))) * &l2)
                * &lambda_p(n, c(ps[2]));
            let expected = &lambda_p(n, c(ps[0] * ps[1] * ps[2])) * &project(&(&l1 * &l2));
            assert!(project(&sandwiched).distance(&expected) < 1e-11);
        }
    }
}

#[test]
fn free_propagator_is_completely_positive() {
    for n in 2..=4 {
        let lo = -1.0 / (n * n - 1) as f64;
        for p in [lo, 0.0, 0.7] {
            let spec = depol_core::gksl::GkslSpec::new(Operator::zeros(n), vec![], 0.0, 1.3, p).unwrap();
            let l0 = build_free_liouvillian(&spec);
            for t in [0.1, 1.0, 10.0] {
                let phi = l0.exp(t).unwrap();
                assert!(phi.min_choi_eigenvalue() > -1e-12, "n={n} p={p} t={t}");
                assert!(phi.distance(&free_propagator(&spec, t, 0.0)) < 1e-10);
            }
        }
    }
}

#[test]
fn free_evolution_commutes_with_projection() {
    let mut r = rng(13);
    for n in 2..=4 {
        let spec = depol_core::gksl::GkslSpec::new(Operator::zeros(n), vec![], 0.0, 0.8, 0.2).unwrap();
        for _ in 0..10 {
            let phi = random_trace_preserving(n, &mut r);
            let t = r.random_range(0.0..3.0);
            let u = free_propagator(&spec, t, 0.0);
            let pphi = project(&phi);
            assert!(project(&(&u * &phi)).distance(&(&u * &pphi)) < 1e-11);
            assert!(project(&(&phi * &u)).distance(&(&pphi * &u)) < 1e-11);
        }
    }
}

#[test]
fn projected_propagator_is_depolarizing() {
    let mut r = rng(14);
    for n in 2..=3 {
        for _ in 0..5 {
            let spec = gauge_normalize(&random_gksl_spec(n, &RandomSpecOptions::default(), &mut r).unwrap()).unwrap();
            for t in [0.3, 1.0] {
                let phi = full_propagator(&spec, t, 0.0).unwrap();
                let p = exact_p(&spec, t, 0.0).unwrap();
                assert!(project(&phi).distance(&lambda_p(n, c(p))) < 1e-11);
                assert!((p_of(&phi).re - p).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn rate_residual_is_cubic_in_lambda() {
    let opts = RandomSpecOptions {
        min_jumps: 1,
        ..Default::default()
    };
    let mut r = rng(15);
    let mut good = 0;
    for i in 0..10 {
        let n = 2 + i % 2;
        let drawn = random_gksl_spec(n, &opts, &mut r).unwrap();
        let spec = gauge_normalize(&drawn.scaled_interaction(0.5).unwrap()).unwrap();
        let errs: Vec<f64> = [0.08, 0.04, 0.02]
            .iter()
            .map(|&lam| {
                let s = spec.with_lambda(lam).unwrap();
                let exact = exact_rate(&s, 0.5, 0.0, default_rate_step(&s)).unwrap();
                (exact - depolarization_rate(&s, 0.5, 0.0).unwrap().total()).abs()
            })
            .collect();
        let ok = [errs[0] / errs[1], errs[1] / errs[2]]
            .iter()
            .all(|x| (6.5..=9.5).contains(x));
        good += ok as usize;
    }
    assert!(good >= 9, "{good}/10 specs show cubic residual scaling");
}

#[test]
fn depolarization_is_monotone_at_leading_order() {
    let mut r = rng(16);
    let opts = RandomSpecOptions {
        lambda: 0.02,
        ..Default::default()
    };
    for n in 2..=3 {
        for _ in 0..10 {
            let spec = gauge_normalize(&random_gksl_spec(n, &opts, &mut r).unwrap()).unwrap();
            let lead = depolarization_rate(&spec, 0.0, 0.0).unwrap();
            assert!(lead.order0 + lead.order1 > 0.0);
            let ps: Vec<f64> = (0..6).map(|i| exact_p(&spec, 0.02 * i as f64, 0.0).unwrap()).collect();
            assert!(ps.windows(2).all(|w| w[1] < w[0]), "{ps:?}");
        }
    }
}

#[test]
fn trace_of_interaction_matches_matrix() {
    let mut r = rng(17);
    let spec = gauge_normalize(&random_gksl_spec(3, &RandomSpecOptions::default(), &mut r).unwrap()).unwrap();
    let li = build_interaction_liouvillian(&spec);
    let direct: C64 = (0..3)
        .flat_map(|k| (0..3).map(move |m| (k, m)))
        .map(|(k, m)| li.apply(&Operator::matrix_unit(3, k, m)).unwrap().matrix()[(k, m)])
        .sum();
    assert!((sop_trace(&li) - direct).norm() < 1e-12);
}

/// Two-level thermal model: `ℒ_I` has eigenvalues `0, −a, −b ± iω₀` with
/// `a = γ₀(2N+1)` and `b = a/2 + 2γ_ph`. The λ²-coefficient of the rate is
/// minus the variance of `{−a, −b ± iω₀}`: `(2/3)ω₀² − (a − 4γ_ph)²/18`.
#[test]
fn two_level_rate_matches_spectrum() {
    let mut r = rng(18);
    let z = c(0.0);
    let one = c(1.0);
    let sigma_plus = Operator::from_rows(&[vec![z, one], vec![z, z]]).unwrap();
    let sigma_minus = sigma_plus.adjoint();
    let sigma_z = Operator::from_rows(&[vec![one, z], vec![z, -one]]).unwrap();
    for _ in 0..50 {
        let omega: f64 = r.random_range(-2.0..2.0);
        let (gamma0, big_n, gamma_ph): (f64, f64, f64) =
            (r.random_range(0.0..2.0), r.random_range(0.0..2.0), r.random_range(0.0..2.0));
        let spec = depol_core::gksl::GkslSpec::new(
            &(&sigma_plus * &sigma_minus) * omega,
            vec![
                &sigma_minus * (gamma0 * (big_n + 1.0)).sqrt(),
                &sigma_plus * (gamma0 * big_n).sqrt(),
                &sigma_z * gamma_ph.sqrt(),
            ],
            1.0,
            1.0,
            0.0,
        )
        .unwrap();
        let rate = depolarization_rate(&spec, 1.0, 0.0).unwrap();
        let a = gamma0 * (2.0 * big_n + 1.0);
        let first = 4.0 / 3.0 * (gamma0 * (big_n + 0.5) + gamma_ph);
        let second = 2.0 / 3.0 * omega * omega - (a - 4.0 * gamma_ph).powi(2) / 18.0;
        let scale = 1.0 + omega * omega + a * a + gamma_ph * gamma_ph;
        assert!((rate.order1 - first).abs() < 1e-13 * scale);
        assert!((rate.order2 - second).abs() < 1e-13 * scale);
    }
}

fn op_strategy(n: usize) -> impl Strategy<Value = Operator> {
    any::<u64>().prop_map(move |s| random_operator(n, &mut rng(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_round_trips(n in 2usize..=5, seed in any::<u64>()) {
        let x = random_operator(n, &mut rng(seed));
        prop_assert_eq!(unvec(&vec(&x)).unwrap(), x);
    }

    #[test]
    fn sandwich_matches_products(a in op_strategy(3), b in op_strategy(3), x in op_strategy(3)) {
        let s = sandwich(&a, &b).unwrap();
        let direct = a.matrix() * x.matrix() * b.matrix();
        let via = s.apply(&x).unwrap();
        prop_assert!((via.matrix() - direct).norm() < 1e-12);
    }

    #[test]
    fn expm_factors_scalar_shift(seed in any::<u64>(), shift in -2.0f64..2.0) {
        let a = random_operator(4, &mut rng(seed)).into_matrix();
        let shifted = &a + DMatrix::<C64>::identity(4, 4) * c(shift);
        let lhs = expm(&shifted).unwrap();
        let rhs = expm(&a).unwrap() * c(shift.exp());
        prop_assert!((lhs - &rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn projection_is_idempotent(n in 2usize..=4, seed in any::<u64>()) {
        let phi = random_trace_preserving(n, &mut rng(seed));
        let once = project(&phi);
        prop_assert!(project(&once).distance(&once) < 1e-12);
        let expected = (sop_trace(&phi) - c(1.0)) / c((n * n - 1) as f64);
        prop_assert!((p_of(&phi) - expected).norm() < 1e-12);
    }

    #[test]
    fn composition_respects_superoperator_trace_of_identity(n in 2usize..=4) {
        let id = Superoperator::identity(n);
        prop_assert!((sop_trace(&id) - c((n * n) as f64)).norm() < 1e-14);
    }
}
