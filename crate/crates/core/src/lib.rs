// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Depolarizing dynamics under the full-unitary twirl.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense operators and superoperators, vectorization,
//!   the matrix exponential and the superoperator trace.
//! * [`twirl`]: the depolarizing family `Λ_p`, the twirling hyperprojector
//!   in closed form and its Monte-Carlo estimator.
//! * [`gksl`]: GKSL Liouvillians, gauge normalization of jump operators and
//!   the chaotic-state trace identities.
//! * [`cumulant`]: integer compositions, the cumulant generators of the
//!   projected master equation and the perturbative depolarization rate.
//! * [`dynamics`]: the exact matrix-exponential oracle and the projected
//!   master-equation solver.
//!
//! Vectorization is column stacking everywhere: `vec(X)[i + n*j] = X[i, j]`,
//! so the map `X ↦ A X B` is represented by `Bᵀ ⊗ A`.

pub mod cumulant;
pub mod dynamics;
pub mod error;
pub mod gksl;
pub mod linalg;
pub mod parallel;
pub mod random;
pub mod twirl;

pub use error::{Error, Result};
pub use linalg::{Operator, Superoperator, C64};
