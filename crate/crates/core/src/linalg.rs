// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

/// Eigenvalues below `SQRT_CUTOFF * max_eigenvalue` are treated as roundoff
/// when taking matrix square roots.
pub const SQRT_CUTOFF: f64 = 1e-14;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Lifts a real matrix to a complex one.
pub fn complexify(m: &RMat) -> CMat {
    m.map(|v| c(v, 0.0))
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Largest absolute entry of `m - m^dagger`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let d = m - m.adjoint();
    d.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.nrows() == m.ncols() && hermiticity_residual(m) <= tol
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn ensure_hermitian(m: &CMat, tol: f64) -> Result<()> {
    ensure_square(m)?;
    let r = hermiticity_residual(m);
    if r > tol {
        return Err(Error::NotHermitian(r));
    }
    Ok(())
}

/// Largest absolute entry of `U^dagger U - I`.
pub fn isometry_residual(m: &CMat) -> f64 {
    let g = m.adjoint() * m - identity(m.ncols());
    g.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: CMat,
}

/// Diagonalizes the Hermitian part of `m`, sorting eigenvalues ascending.
pub fn eigh(m: &CMat) -> HermEig {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermEig { values, vectors }
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn eigvalsh_real(m: &RMat) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut v: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Rebuilds `V diag(f(lambda)) V^dagger`.
pub fn spectral_map(eig: &HermEig, f: impl Fn(f64) -> f64) -> CMat {
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for k in 0..n {
        let w = f(eig.values[k]);
        scaled.column_mut(k).scale_mut(w);
    }
    scaled * eig.vectors.adjoint()
}

/// Square root of a positive semidefinite matrix. Eigenvalues below
/// `SQRT_CUTOFF` relative to the largest one are set to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let eig = eigh(m);
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let floor = SQRT_CUTOFF * top;
    spectral_map(&eig, |v| if v > floor { v.sqrt() } else { 0.0 })
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn trace_norm(m: &CMat) -> f64 {
    singular_values(m).iter().sum()
}

pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix exponential (Pade approximant with scaling and squaring).
pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

/// `exp(-i t H)`.
pub fn unitary_from_hamiltonian(h: &CMat, t: f64) -> CMat {
    expm(&(h * c(0.0, -t)))
}

/// Column-stacking vectorization.
pub fn vec_col(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvec_col(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// `Re Tr(A^dagger B)`.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
