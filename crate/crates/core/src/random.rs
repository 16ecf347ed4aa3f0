// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random matrices and states.
//!
//! Every stochastic routine in the crate draws from [`Rng`], a ChaCha8 stream
//! seeded from a single `u64`, so runs are reproducible bit-for-bit.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMat, CVec, C64};
use crate::qcore::{DensityMatrix, PureState};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal(rng: &mut Rng) -> C64 {
    c(normal(rng), normal(rng))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_hermitian(rng: &mut Rng, n: usize) -> CMat {
    let g = ginibre(rng, n, n);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Isometry `rows x cols` (`rows >= cols`) from the QR decomposition of a
/// Ginibre matrix, with phases fixed so the distribution is Haar.
pub fn random_isometry(rng: &mut Rng, rows: usize, cols: usize) -> CMat {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rng, rows, cols).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    q
}

pub fn random_unitary(rng: &mut Rng, n: usize) -> CMat {
    random_isometry(rng, n, n)
}

pub fn random_pure_state(rng: &mut Rng, n: usize) -> PureState {
    let v = CVec::from_fn(n, |_, _| complex_normal(rng));
    PureState::normalized(v).expect("Gaussian vector is nonzero")
}

/// Full-rank density matrix `G G^dagger / Tr` with a Ginibre `G`.
pub fn random_density_matrix(rng: &mut Rng, n: usize) -> DensityMatrix {
    let g = ginibre(rng, n, n);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / c(tr, 0.0)).expect("Wishart matrix is a valid state")
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_simplex(rng: &mut Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::isometry_residual;

    #[test]
    fn same_seed_same_stream() {
        let a = ginibre(&mut rng(7), 3, 3);
        let b = ginibre(&mut rng(7), 3, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn isometries_are_isometries() {
        let mut r = rng(1);
        for (rows, cols) in [(2, 2), (4, 2), (6, 3)] {
            let v = random_isometry(&mut r, rows, cols);
            assert!(isometry_residual(&v) < 1e-12);
        }
    }
}
