// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex operators and superoperators.
//!
//! A [`Superoperator`] on `n×n` matrices is stored as an `n²×n²` matrix acting
//! on column-stacked vectors. nalgebra stores matrices column-major, so
//! `vec` is a plain copy of the backing slice.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 32;

/// Default absolute tolerance for complex comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(n))
    }
}

fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Frobenius norm of a dense complex matrix.
pub fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// An `n×n` complex matrix on the system Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
}

impl Operator {
    /// Wraps a square matrix with `2 ≤ n ≤ 32` and finite entries.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { m })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        assert!(check_dim(n).is_ok(), "dimension {n} out of range");
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(check_dim(n).is_ok(), "dimension {n} out of range");
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    /// Matrix unit `|row⟩⟨col|`.
    pub fn matrix_unit(n: usize, row: usize, col: usize) -> Self {
        let mut op = Self::zeros(n);
        op.m[(row, col)] = C64::new(1.0, 0.0);
        op
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.m)
    }

    /// `‖A − A†‖_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        frobenius(&(&self.m - self.m.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator {
            m: &self.m * &other.m - &other.m * &self.m,
        }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m + &rhs.m }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m - &rhs.m }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m * &rhs.m }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator { m: &self.m * rhs }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self * C64::new(rhs, 0.0)
    }
}

/// Column-stacking vectorization.
pub fn vec(x: &Operator) -> DVector<C64> {
    DVector::from_column_slice(x.m.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &DVector<C64>) -> Result<Operator> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::InvalidParameter(format!(
            "vector length {} is not a perfect square",
            v.len()
        )));
    }
    Operator::new(DMatrix::from_column_slice(n, n, v.as_slice()))
}

/// A linear map on `n×n` matrices, stored as its `n²×n²` representation
/// matrix under column stacking.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    m: DMatrix<C64>,
}

impl Superoperator {
    /// Wraps an `n²×n²` representation matrix.
    pub fn from_matrix(dim: usize, m: DMatrix<C64>) -> Result<Self> {
        check_dim(dim)?;
        if m.nrows() != dim * dim || m.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: if m.nrows() != dim * dim {
                    m.nrows()
                } else {
                    m.ncols()
                },
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, m })
    }

    /// Builds the superoperator from its action on matrix units.
    pub fn from_fn(dim: usize, f: impl Fn(&Operator) -> Operator) -> Self {
        let d2 = dim * dim;
        let mut m = DMatrix::zeros(d2, d2);
        for col in 0..dim {
            for row in 0..dim {
                let image = f(&Operator::matrix_unit(dim, row, col));
                m.column_mut(row + dim * col)
                    .copy_from_slice(image.m.as_slice());
            }
        }
        Self { dim, m }
    }

    /// Builds the superoperator `X ↦ Σ_i K_i X K_i†` from Kraus operators.
    pub fn from_kraus(kraus: &[Operator]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        let n = first.dim();
        let mut acc = Self::zeros(n);
        for k in kraus {
            acc = &acc + &sandwich(k, &k.adjoint())?;
        }
        Ok(acc)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(check_dim(dim).is_ok(), "dimension {dim} out of range");
        Self {
            dim,
            m: DMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(check_dim(dim).is_ok(), "dimension {dim} out of range");
        Self {
            dim,
            m: DMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// The completely depolarizing map `X ↦ (I/n) Tr X`.
    pub fn trace_replace(dim: usize) -> Self {
        let w = vec(&Operator::identity(dim));
        let scale = C64::new(1.0 / dim as f64, 0.0);
        Self {
            dim,
            m: &w * w.transpose() * scale,
        }
    }

    /// `Π = 𝓘 − (I/n) Tr(·)`, the projector onto traceless matrices.
    pub fn traceless_projector(dim: usize) -> Self {
        &Self::identity(dim) - &Self::trace_replace(dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        check_same_dim(self.dim, x.dim())?;
        let v = &self.m * vec(x);
        Ok(Operator {
            m: DMatrix::from_column_slice(self.dim, self.dim, v.as_slice()),
        })
    }

    /// `self ∘ other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        check_same_dim(self.dim, other.dim)?;
        Ok(self * other)
    }

    pub fn powi(&self, k: usize) -> Superoperator {
        let mut acc = Self::identity(self.dim);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.m)
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Superoperator) -> f64 {
        frobenius(&(&self.m - &other.m))
    }

    /// `e^{t·self}`.
    pub fn exp(&self, t: f64) -> Result<Superoperator> {
        let m = expm(&(&self.m * C64::new(t, 0.0)))?;
        Ok(Self { dim: self.dim, m })
    }

    pub fn try_inverse(&self) -> Result<Superoperator> {
        let m = self.m.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(Self { dim: self.dim, m })
    }

    /// Largest `|Tr Φ(E_km)|` over matrix units, i.e. how far the map is from
    /// annihilating traces.
    pub fn trace_annihilation_residual(&self) -> f64 {
        let n = self.dim;
        (0..n * n)
            .map(|c| {
                (0..n)
                    .map(|i| self.m[(i + n * i, c)])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_trace_annihilating(&self, tol: f64) -> bool {
        self.trace_annihilation_residual() <= tol
    }

    /// Choi matrix `Σ_{k,m} E_km ⊗ Φ(E_km)`.
    pub fn choi(&self) -> DMatrix<C64> {
        let n = self.dim;
        let mut c = DMatrix::zeros(n * n, n * n);
        for k in 0..n {
            for m in 0..n {
                let col = self.m.column(k + n * m);
                for a in 0..n {
                    for b in 0..n {
                        c[(k * n + a, m * n + b)] = col[a + n * b];
                    }
                }
            }
        }
        c
    }

    /// Smallest eigenvalue of the Hermitian part of the Choi matrix.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        let c = self.choi();
        let herm = (&c + c.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Completely positive and trace preserving within `tol`.
    pub fn is_cptp(&self, tol: f64) -> bool {
        is_trace_preserving(self, tol) && self.min_choi_eigenvalue() >= -tol
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator {
            dim: self.dim,
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator {
            dim: self.dim,
            m: &self.m - &rhs.m,
        }
    }
}

impl Neg for &Superoperator {
    type Output = Superoperator;
    fn neg(self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            m: -&self.m,
        }
    }
}

/// Composition: `(a * b)(X) = a(b(X))`.
impl Mul for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator {
            dim: self.dim,
            m: &self.m * &rhs.m,
        }
    }
}

impl Mul<C64> for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: C64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            m: &self.m * rhs,
        }
    }
}

impl Mul<f64> for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: f64) -> Superoperator {
        self * C64::new(rhs, 0.0)
    }
}

/// The map `X ↦ A X B`, represented as `Bᵀ ⊗ A`.
pub fn sandwich(a: &Operator, b: &Operator) -> Result<Superoperator> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(Superoperator {
        dim: a.dim(),
        m: b.m.transpose().kronecker(&a.m),
    })
}

/// Superoperator trace `tr Φ = Σ_{k,m} ⟨k|Φ(|k⟩⟨m|)|m⟩`, which under column
/// stacking is the ordinary trace of the representation matrix.
pub fn sop_trace(phi: &Superoperator) -> C64 {
    phi.m.trace()
}

/// `Tr Φ(I)`.
pub fn op_trace_of_image(phi: &Superoperator) -> C64 {
    let n = phi.dim;
    // Tr Φ(I) = Σ_i Σ_k M[(i + n i), (k + n k)]
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n {
        for i in 0..n {
            acc += phi.m[(i + n * i, k + n * k)];
        }
    }
    acc
}

/// Chaotic-state average `⟨A⟩ = Tr(A)/n`.
pub fn chaotic_average(a: &Operator) -> C64 {
    a.trace() / a.dim() as f64
}

/// `Tr Φ(E_km) = δ_km` for every matrix unit, within `tol`.
pub fn is_trace_preserving(phi: &Superoperator, tol: f64) -> bool {
    let n = phi.dim;
    (0..n).all(|col| {
        (0..n).all(|row| {
            let tr: C64 = (0..n).map(|i| phi.m[(i + n * i, row + n * col)]).sum();
            let expected = if row == col { 1.0 } else { 0.0 };
            (tr - expected).norm() <= tol
        })
    })
}

/// Matrix exponential by scaling and squaring.
///
/// The argument is scaled by `2^{-s}` until its 1-norm is at most 0.5, the
/// exponential of the scaled matrix is summed as a Taylor series to machine
/// precision, and the result is squared `s` times.
pub fn expm(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let dim = m.nrows();
    let norm = norm1(m);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m * C64::new(2f64.powi(-squarings), 0.0);

    let mut result = DMatrix::<C64>::identity(dim, dim);
    let mut term = DMatrix::<C64>::identity(dim, dim);
    for k in 1..=40 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if norm1(&term) <= f64::EPSILON * 1e-2 * norm1(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}
