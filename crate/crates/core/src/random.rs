// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random operators, channels and generators.
//!
//! Used by the Monte-Carlo twirl, the verification suites and the tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::gksl::GkslSpec;
use crate::linalg::{vec, Operator, Superoperator, C64};
use crate::twirl::haar_unitary;

/// Complex Ginibre matrix with i.i.d. entries of unit variance.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Random operator with entries of variance `1/n`.
pub fn random_operator<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
    let m = ginibre(n, n, rng) * C64::new(1.0 / (n as f64).sqrt(), 0.0);
    Operator::new(m).expect("valid dimension")
}

/// Random Hermitian operator (GUE-like, spectrum of order one).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
    let g = random_operator(n, rng);
    &(&g + &g.adjoint()) * 0.5
}

/// Random density matrix `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
    let g = random_operator(n, rng);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    &rho * (1.0 / tr)
}

/// Random CPTP channel with `rank` Kraus operators, taken as the blocks of the
/// first `n` columns of a Haar unitary on `n·rank` dimensions.
pub fn random_channel<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Superoperator {
    let rank = rank.max(1);
    let kraus: Vec<Operator> = if rank == 1 {
        vec![haar_unitary(n, rng)]
    } else {
        let u = haar_unitary(n * rank, rng);
        (0..rank)
            .map(|i| Operator::new(u.matrix().view((i * n, 0), (n, n)).into_owned()).unwrap())
            .collect()
    };
    Superoperator::from_kraus(&kraus).expect("non-empty Kraus list")
}

/// Random superoperator, rescaled so that `Tr Φ(X) = Tr X` for all `X`.
/// Not completely positive in general.
pub fn random_trace_preserving<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Superoperator {
    let d2 = n * n;
    let m = ginibre(d2, d2, rng) * C64::new(1.0 / n as f64, 0.0);
    let w = vec(&Operator::identity(n));
    // w† M must equal w†; w†w = n.
    let defect = w.transpose() - w.transpose() * &m;
    let fixed = &m + &w * defect * C64::new(1.0 / n as f64, 0.0);
    Superoperator::from_matrix(n, fixed).expect("valid dimension")
}

/// Random superoperator with `Tr L(X) = 0` for all `X`.
pub fn random_trace_annihilating<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Superoperator {
    let d2 = n * n;
    let m = ginibre(d2, d2, rng) * C64::new(1.0 / n as f64, 0.0);
    let w = vec(&Operator::identity(n));
    let fixed = &m - &w * (w.transpose() * &m) * C64::new(1.0 / n as f64, 0.0);
    Superoperator::from_matrix(n, fixed).expect("valid dimension")
}

/// Options for [`random_gksl_spec`].
#[derive(Clone, Debug)]
pub struct RandomSpecOptions {
    pub min_jumps: usize,
    pub max_jumps: usize,
    /// Allow the Hamiltonian to vanish.
    pub allow_zero_hamiltonian: bool,
    pub gamma: f64,
    /// Range of the free depolarizing parameter, intersected with the channel range.
    pub p_range: (f64, f64),
    pub lambda: f64,
    /// Overall scale of `H` and the `L_j`.
    pub scale: f64,
}

impl Default for RandomSpecOptions {
    fn default() -> Self {
        Self {
            min_jumps: 0,
            max_jumps: 3,
            allow_zero_hamiltonian: false,
            gamma: 1.0,
            p_range: (-1.0, 0.5),
            lambda: 0.05,
            scale: 1.0,
        }
    }
}

/// Random physical GKSL spec with jump operators that are generally not
/// traceless (callers normalize the gauge).
pub fn random_gksl_spec<R: Rng + ?Sized>(
    n: usize,
    opts: &RandomSpecOptions,
    rng: &mut R,
) -> Result<GkslSpec> {
    let n_jumps = rng.random_range(opts.min_jumps..=opts.max_jumps.max(opts.min_jumps));
    let zero_h = opts.allow_zero_hamiltonian && n_jumps > 0 && rng.random_bool(0.25);
    let h = if zero_h {
        Operator::zeros(n)
    } else {
        &random_hermitian(n, rng) * opts.scale
    };
    let jump_scale = opts.scale / (n_jumps.max(1) as f64).sqrt();
    let jumps = (0..n_jumps)
        .map(|_| &random_operator(n, rng) * jump_scale)
        .collect();
    let lo = opts.p_range.0.max(-1.0 / (n * n - 1) as f64);
    let hi = opts.p_range.1.min(1.0);
    let p = if hi > lo { rng.random_range(lo..hi) } else { lo };
    GkslSpec::new(h, jumps, opts.lambda, opts.gamma, p)
}
