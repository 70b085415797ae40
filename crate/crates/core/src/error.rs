// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} out of range (supported: 2..=32)")]
    InvalidDimension(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry in input matrix")]
    NonFinite,

    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("superoperator does not annihilate traces (residual {residual:e})")]
    NotTraceAnnihilating { residual: f64 },

    #[error("jump operator {index} is not traceless (|Tr L| = {trace:e}); gauge-normalize first")]
    NotGaugeNormalized { index: usize, trace: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("order {order} outside supported range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("projected trajectory too small to resolve the rate (|p| = {p:e})")]
    UnresolvableRate { p: f64 },
}
