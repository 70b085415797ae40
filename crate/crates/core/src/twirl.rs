// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Depolarizing channels and the full-unitary twirling hyperprojector.
//!
//! The twirl `𝔓(Φ) = ∫ U† Φ(U · U†) U dU` over the Haar measure on `U(n)` has
//! the two-coefficient closed form
//!
//! ```text
//! 𝔓(Φ)X = (n Tr Φ(I) − tr Φ) / (n(n²−1)) · (Tr X) I
//!       + (n tr Φ − Tr Φ(I)) / (n(n²−1)) · X
//! ```
//!
//! and maps every trace-preserving `Φ` onto the depolarizing family
//! `Λ_p X = pX + (1−p)(I/n) Tr X` with `p = (tr Φ − 1)/(n² − 1)`.
//!
//! For a trace-annihilating `ℒ` the identities `Λ_p ℒ = p ℒ` and
//! `ℒ Λ_p = p ℒ + (1−p)(ℒ(I)/n) Tr(·)` hold, so the commutator
//! `[ℒ, Λ_p]` equals `(1−p)(ℒ(I)/n) Tr(·)`; see [`commutator_with_lambda`].

use log::warn;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    check_dim, is_trace_preserving, op_trace_of_image, sandwich, sop_trace, vec, Operator,
    Superoperator, C64, DEFAULT_TOL,
};
use crate::parallel;
use crate::random::ginibre;

/// Samples per Monte-Carlo chunk. Each chunk owns one RNG stream.
const MC_CHUNK: usize = 256;

/// Parameters of a depolarizing map `Λ_p` on `n×n` matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepolarizingParams {
    pub dim: usize,
    pub p: C64,
}

impl DepolarizingParams {
    pub fn new(dim: usize, p: C64) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, p })
    }

    pub fn real(dim: usize, p: f64) -> Result<Self> {
        Self::new(dim, C64::new(p, 0.0))
    }

    /// Lower end of the channel range, `−1/(n²−1)`.
    pub fn channel_lower_bound(dim: usize) -> f64 {
        -1.0 / (dim * dim - 1) as f64
    }

    /// `Λ_p` is a channel iff `p` is real and lies in `[−1/(n²−1), 1]`.
    pub fn is_channel(&self, tol: f64) -> bool {
        self.p.im.abs() <= tol
            && self.p.re >= Self::channel_lower_bound(self.dim) - tol
            && self.p.re <= 1.0 + tol
    }

    pub fn to_superoperator(&self) -> Superoperator {
        lambda_p(self.dim, self.p)
    }
}

/// `Λ_p = p 𝓘 + (1−p)(I/n) Tr(·)`.
pub fn lambda_p(n: usize, p: C64) -> Superoperator {
    let id = Superoperator::identity(n);
    let replace = Superoperator::trace_replace(n);
    &(&id * p) + &(&replace * (C64::new(1.0, 0.0) - p))
}

/// `Λ_p Λ_q = Λ_{pq}`.
pub fn lambda_compose(p: &DepolarizingParams, q: &DepolarizingParams) -> Result<DepolarizingParams> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    Ok(DepolarizingParams {
        dim: p.dim,
        p: p.p * q.p,
    })
}

/// The two coefficients `(a, b)` of `𝔓(Φ)X = a (Tr X) I + b X`.
pub fn projection_coefficients(phi: &Superoperator) -> (C64, C64) {
    let n = phi.dim() as f64;
    let tr_phi = sop_trace(phi);
    let tr_image = op_trace_of_image(phi);
    let denom = n * (n * n - 1.0);
    ((n * tr_image - tr_phi) / denom, (n * tr_phi - tr_image) / denom)
}

/// Closed-form twirl over the full unitary group. Total on all superoperators.
pub fn project(phi: &Superoperator) -> Superoperator {
    let n = phi.dim();
    let (a, b) = projection_coefficients(phi);
    // X ↦ (Tr X) I is n times the trace-replacement map.
    let replace = Superoperator::trace_replace(n);
    &(&replace * (a * n as f64)) + &(&Superoperator::identity(n) * b)
}

/// `p = (tr Φ − 1)/(n² − 1)`, the depolarizing parameter of `𝔓(Φ)` for
/// trace-preserving `Φ`. Logs a warning when `Φ` does not preserve traces.
pub fn p_of(phi: &Superoperator) -> C64 {
    if !is_trace_preserving(phi, DEFAULT_TOL) {
        warn!("p_of: superoperator is not trace preserving; 𝔓(Φ) is not of the Λ_p form");
    }
    let n = phi.dim() as f64;
    (sop_trace(phi) - 1.0) / (n * n - 1.0)
}

/// `𝔓(ℒ) = tr ℒ/(n²−1) · (𝓘 − (I/n) Tr(·))` for trace-annihilating `ℒ`.
pub fn project_generator(l: &Superoperator) -> Result<Superoperator> {
    project_generator_with_scalar(l).map(|(_, s)| s)
}

/// [`project_generator`] together with the scalar `tr ℒ/(n²−1)`.
pub fn project_generator_with_scalar(l: &Superoperator) -> Result<(C64, Superoperator)> {
    let residual = l.trace_annihilation_residual();
    let scale = 1.0f64.max(l.frobenius_norm());
    if residual > DEFAULT_TOL * scale {
        return Err(Error::NotTraceAnnihilating { residual });
    }
    let n = l.dim() as f64;
    let c = sop_trace(l) / (n * n - 1.0);
    Ok((c, &Superoperator::traceless_projector(l.dim()) * c))
}

/// `[ℒ, Λ_p] = (1−p)(ℒ(I)/n) Tr(·)` for trace-annihilating `ℒ`, assembled
/// from `Λ_p ℒ = p ℒ` and `ℒ Λ_p = p ℒ + (1−p)(ℒ(I)/n) Tr(·)`.
pub fn commutator_with_lambda(l: &Superoperator, p: C64) -> Result<Superoperator> {
    let residual = l.trace_annihilation_residual();
    if residual > DEFAULT_TOL * 1.0f64.max(l.frobenius_norm()) {
        return Err(Error::NotTraceAnnihilating { residual });
    }
    let n = l.dim();
    let image = l.apply(&Operator::identity(n))?;
    // X ↦ (ℒ(I)/n) Tr X = (ℒ(I)/n) vec(I)ᵀ vec(X)
    let w = vec(&Operator::identity(n));
    let col = vec(&image);
    let m = &col * w.transpose() * ((C64::new(1.0, 0.0) - p) / n as f64);
    Superoperator::from_matrix(n, m)
}

/// Haar-random unitary: Ginibre matrix, QR decomposition, and the columns of
/// `Q` rephased by `R_jj/|R_jj|`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
    let z = ginibre(n, n, rng);
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let d = r[(i, i)];
            let norm = d.norm();
            if norm > 0.0 {
                d / norm
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Operator::new(q * phases).expect("valid dimension")
}

/// Haar-random unitary from an explicit seed.
pub fn haar_sample(n: usize, seed: u64) -> Result<Operator> {
    check_dim(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(haar_unitary(n, &mut rng))
}

/// One Monte-Carlo term `U† Φ(U · U†) U`.
pub fn conjugate_by(phi: &Superoperator, u: &Operator) -> Result<Superoperator> {
    let inner = sandwich(u, &u.adjoint())?;
    let outer = sandwich(&u.adjoint(), u)?;
    Ok(&(&outer * phi) * &inner)
}

/// Monte-Carlo estimate `(1/N) Σ_i U_i† Φ(U_i · U_i†) U_i` of [`project`].
///
/// Samples are drawn in chunks of fixed size; chunk `c` uses stream `c` of a
/// ChaCha8 generator seeded with `seed`. Partial sums are reduced in chunk
/// order, so the estimate depends only on `(Φ, samples, seed)`, and the
/// first `N` samples are the same for every larger sample count.
pub fn monte_carlo_twirl(phi: &Superoperator, samples: usize, seed: u64) -> Result<Superoperator> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let n = phi.dim();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<Result<DMatrix<C64>>> = parallel::pool().install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let count = MC_CHUNK.min(samples - c * MC_CHUNK);
                let mut acc = DMatrix::<C64>::zeros(n * n, n * n);
                for _ in 0..count {
                    let u = haar_unitary(n, &mut rng);
                    acc += conjugate_by(phi, &u)?.matrix();
                }
                Ok(acc)
            })
            .collect()
    });
    let mut total = DMatrix::<C64>::zeros(n * n, n * n);
    for part in partials {
        total += part?;
    }
    Superoperator::from_matrix(n, total * C64::new(1.0 / samples as f64, 0.0))
}

/// Entanglement fidelity `⟨Ω|(Φ⊗I)(|Ω⟩⟨Ω|)|Ω⟩` with `|Ω⟩ = n^{-1/2} Σ_k |k⟩|k⟩`,
/// evaluated on the bipartite state. Logs a warning on non-CPTP input.
pub fn entanglement_fidelity(phi: &Superoperator) -> f64 {
    if !phi.is_cptp(1e-9) {
        warn!("entanglement_fidelity: superoperator is not a CPTP channel");
    }
    let n = phi.dim();
    let norm = 1.0 / (n as f64).sqrt();
    let omega = nalgebra::DVector::from_fn(n * n, |idx, _| {
        if idx / n == idx % n {
            C64::new(norm, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // (Φ⊗I)(|Ω⟩⟨Ω|) = (1/n) Σ_{k,m} Φ(E_km) ⊗ E_km
    let mut out = DMatrix::<C64>::zeros(n * n, n * n);
    for k in 0..n {
        for m in 0..n {
            let image = phi
                .apply(&Operator::matrix_unit(n, k, m))
                .expect("matching dimension");
            let unit = Operator::matrix_unit(n, k, m);
            out += image.matrix().kronecker(unit.matrix()) * C64::new(1.0 / n as f64, 0.0);
        }
    }
    (omega.adjoint() * out * &omega)[(0, 0)].re
}

/// Checks Hermiticity, unit trace and positivity of `rho` within `tol`.
pub fn check_density_matrix(rho: &Operator, tol: f64) -> Result<()> {
    let herm = rho.hermiticity_residual();
    if herm > tol {
        return Err(Error::NotDensityMatrix(format!(
            "not Hermitian (residual {herm:e})"
        )));
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > tol {
        return Err(Error::NotDensityMatrix(format!(
            "trace {} differs from 1",
            tr.re
        )));
    }
    let h = (rho.matrix() + rho.matrix().adjoint()) * C64::new(0.5, 0.0);
    let min_eig = h
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -tol {
        return Err(Error::NotDensityMatrix(format!(
            "negative eigenvalue {min_eig:e}"
        )));
    }
    Ok(())
}

/// Twirled two-time correlation `Tr(Y 𝔓(Φ)(X ρ₀))`.
pub fn twirled_correlation(
    y: &Operator,
    x: &Operator,
    rho0: &Operator,
    phi: &Superoperator,
) -> Result<C64> {
    let n = phi.dim();
    for d in [y.dim(), x.dim(), rho0.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d,
            });
        }
    }
    check_density_matrix(rho0, 1e-10)?;
    let image = project(phi).apply(&(x * rho0))?;
    Ok((y * &image).trace())
}
