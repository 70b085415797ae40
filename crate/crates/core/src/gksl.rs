// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! GKSL generators.
//!
//! The full generator is `ℒ₀ + λ ℒ_I` with the depolarizing free part
//! `ℒ₀ = γ(Λ_p − 𝓘)` and the perturbation
//! `ℒ_I = −i[H, ·] + Σ_j (L_j · L_j† − ½{L_j† L_j, ·})`.

use crate::error::{Error, Result};
use crate::linalg::{chaotic_average, sandwich, Operator, Superoperator, C64};
use crate::twirl::{lambda_p, DepolarizingParams};

/// Absolute tolerance on `‖H − H†‖_F`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative tolerance on `|Tr L_j|` for the traceless gauge.
pub const GAUGE_TOL: f64 = 1e-12;

/// Hamiltonian, jump operators and free-dynamics parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GkslSpec {
    dim: usize,
    hamiltonian: Operator,
    jumps: Vec<Operator>,
    lambda: f64,
    gamma: f64,
    p: f64,
}

impl GkslSpec {
    /// Validates dimensions, Hermiticity of `H`, `γ > 0`, `λ ≥ 0` and the
    /// channel range of `p`.
    pub fn new(
        hamiltonian: Operator,
        jumps: Vec<Operator>,
        lambda: f64,
        gamma: f64,
        p: f64,
    ) -> Result<Self> {
        let dim = hamiltonian.dim();
        for l in &jumps {
            if l.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: l.dim(),
                });
            }
        }
        let residual = hamiltonian.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        let lo = DepolarizingParams::channel_lower_bound(dim);
        if !(p.is_finite() && p >= lo && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in [{lo}, 1], got {p}"
            )));
        }
        Ok(Self {
            dim,
            hamiltonian,
            jumps,
            lambda,
            gamma,
            p,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Free depolarization rate `(1−p)γ`.
    pub fn free_rate(&self) -> f64 {
        (1.0 - self.p) * self.gamma
    }

    /// Same generator with a different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.hamiltonian.clone(),
            self.jumps.clone(),
            lambda,
            self.gamma,
            self.p,
        )
    }

    /// Spec whose interaction generator is `s ℒ_I`: `H ↦ sH`, `L_j ↦ √s L_j`.
    pub fn scaled_interaction(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be >= 0, got {s}")));
        }
        let root = s.sqrt();
        Self::new(
            &self.hamiltonian * s,
            self.jumps.iter().map(|l| l * root).collect(),
            self.lambda,
            self.gamma,
            self.p,
        )
    }

    /// Largest `|Tr L_j|`, zero when there are no jumps.
    pub fn max_jump_trace(&self) -> f64 {
        self.jumps
            .iter()
            .map(|l| l.trace().norm())
            .fold(0.0, f64::max)
    }

    /// Fails with the offending index when some `Tr L_j` is not zero.
    pub fn check_gauge(&self) -> Result<()> {
        for (index, l) in self.jumps.iter().enumerate() {
            let trace = l.trace().norm();
            if trace > GAUGE_TOL * 1.0f64.max(l.frobenius_norm()) {
                return Err(Error::NotGaugeNormalized { index, trace });
            }
        }
        Ok(())
    }

    pub fn is_gauge_normalized(&self) -> bool {
        self.check_gauge().is_ok()
    }
}

/// Chaotic-state averages entering the superoperator traces of `ℒ_I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceIdentities {
    /// `⟨G⟩` with `G = Σ_j L_j† L_j`.
    pub mean_g: f64,
    /// `tr ℒ_I / n² = −⟨G⟩`.
    pub tr_li_over_n2: f64,
    /// `tr ℒ_I² / n²`.
    pub tr_li2_over_n2: f64,
    /// `⟨H²⟩ − ⟨H⟩²`.
    pub variance_h: f64,
    /// `Σ_{j,k} |⟨L_j L_k⟩|²`.
    pub sum_abs_ljlk: f64,
    /// `⟨G²⟩`.
    pub mean_g2: f64,
}

/// Shifts every `L_j` by `c_j I` with `c_j = −Tr(L_j)/n` and compensates in
/// `H` by `(1/2i) Σ_j (c_j* L_j − c_j L_j†)`, which leaves `ℒ_I` unchanged.
pub fn gauge_normalize(spec: &GkslSpec) -> Result<GkslSpec> {
    let n = spec.dim;
    let residual = spec.hamiltonian.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let id = Operator::identity(n);
    let mut shift = Operator::zeros(n);
    let mut jumps = Vec::with_capacity(spec.jumps.len());
    for l in &spec.jumps {
        let c = -l.trace() / n as f64;
        if c == C64::new(0.0, 0.0) {
            jumps.push(l.clone());
            continue;
        }
        let term = &(l * c.conj()) - &(&l.adjoint() * c);
        shift = &shift + &term;
        jumps.push(l + &(&id * c));
    }
    let hamiltonian = &spec.hamiltonian + &(&shift * (C64::new(0.0, -0.5)));
    // Restore exact Hermiticity lost to rounding.
    let hamiltonian = &(&hamiltonian + &hamiltonian.adjoint()) * 0.5;
    GkslSpec::new(hamiltonian, jumps, spec.lambda, spec.gamma, spec.p)
}

/// `ℒ_I = −i[H, ·] + Σ_j (L_j · L_j† − ½{L_j† L_j, ·})`.
pub fn build_interaction_liouvillian(spec: &GkslSpec) -> Superoperator {
    let n = spec.dim;
    let id = Operator::identity(n);
    let minus_i = C64::new(0.0, -1.0);
    let sw = |a: &Operator, b: &Operator| sandwich(a, b).expect("dimensions checked in GkslSpec");
    let mut l = &(&sw(&spec.hamiltonian, &id) - &sw(&id, &spec.hamiltonian)) * minus_i;
    for jump in &spec.jumps {
        let ldag = jump.adjoint();
        let g = &ldag * jump;
        let anti = &sw(&g, &id) + &sw(&id, &g);
        l = &(&l + &sw(jump, &ldag)) - &(&anti * 0.5);
    }
    l
}

/// `ℒ₀ = γ(Λ_p − 𝓘)`, i.e. `ℒ₀X = −(1−p)γ(X − (I/n) Tr X)`.
pub fn build_free_liouvillian(spec: &GkslSpec) -> Superoperator {
    let n = spec.dim;
    let lam = lambda_p(n, C64::new(spec.p, 0.0));
    &(&lam - &Superoperator::identity(n)) * spec.gamma
}

/// `ℒ₀ + λ ℒ_I`.
pub fn build_full_liouvillian(spec: &GkslSpec) -> Superoperator {
    let free = build_free_liouvillian(spec);
    if spec.lambda == 0.0 {
        return free;
    }
    &free + &(&build_interaction_liouvillian(spec) * spec.lambda)
}

/// `G = Σ_j L_j† L_j`.
pub fn dissipation_operator(spec: &GkslSpec) -> Operator {
    spec.jumps
        .iter()
        .fold(Operator::zeros(spec.dim), |acc, l| &acc + &(&l.adjoint() * l))
}

/// Superoperator traces of `ℒ_I` and `ℒ_I²` from operator traces alone:
///
/// ```text
/// tr ℒ_I  / n² = −⟨G⟩
/// tr ℒ_I² / n² = −2(⟨H²⟩ − ⟨H⟩²) + Σ_{j,k} |⟨L_j L_k⟩|² + ½⟨G²⟩ + ½⟨G⟩²
/// ```
///
/// Requires the traceless gauge.
pub fn analytic_traces(spec: &GkslSpec) -> Result<TraceIdentities> {
    spec.check_gauge()?;
    let h = &spec.hamiltonian;
    let g = dissipation_operator(spec);
    let mean_g = chaotic_average(&g).re;
    let mean_g2 = chaotic_average(&(&g * &g)).re;
    let mean_h = chaotic_average(h).re;
    let variance_h = (chaotic_average(&(h * h)).re - mean_h * mean_h).max(0.0);
    let mut sum_abs_ljlk = 0.0;
    for lj in &spec.jumps {
        for lk in &spec.jumps {
            sum_abs_ljlk += chaotic_average(&(lj * lk)).norm_sqr();
        }
    }
    Ok(TraceIdentities {
        mean_g,
        tr_li_over_n2: -mean_g,
        tr_li2_over_n2: -2.0 * variance_h + sum_abs_ljlk + 0.5 * mean_g2 + 0.5 * mean_g * mean_g,
        variance_h,
        sum_abs_ljlk,
        mean_g2,
    })
}
