// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};

/// Absolute tolerance used by all state validity checks.
pub const STATE_TOL: f64 = 1e-9;

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVec,
}

impl PureState {
    pub fn new(amplitudes: CVec) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(v: CVec) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { amplitudes: v / c(norm, 0.0) })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[k] = c(1.0, 0.0);
        Self { amplitudes: v }
    }

    /// `(|0> + |1>)/sqrt(2)`.
    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { amplitudes: CVec::from_vec(vec![c(s, 0.0), c(s, 0.0)]) }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { data: linalg::hermitian_part(&m) }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity to [`STATE_TOL`].
    pub fn new(data: CMat) -> Result<Self> {
        linalg::ensure_square(&data)?;
        if data.nrows() == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        let herm = linalg::hermiticity_residual(&data);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
        }
        let tr = data.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let data = linalg::hermitian_part(&data);
        let min = linalg::eigh(&data).values[0];
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { data })
    }

    /// Symmetrizes and renormalizes a matrix produced by a trace-preserving
    /// map without re-checking positivity.
    pub(crate) fn from_propagated(data: CMat) -> Self {
        let h = linalg::hermitian_part(&data);
        let tr = h.trace().re;
        Self { data: h / c(tr, 0.0) }
    }

    /// Projects a Hermitian matrix onto the nearest state by clipping negative
    /// eigenvalues and renormalizing.
    pub fn project(data: &CMat) -> Result<Self> {
        linalg::ensure_square(data)?;
        let eig = linalg::eigh(data);
        let m = linalg::spectral_map(&eig, |v| v.max(0.0));
        let tr = m.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState("no positive part to project onto".into()));
        }
        Ok(Self { data: m / c(tr, 0.0) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { data: linalg::identity(dim) / c(dim as f64, 0.0) }
    }

    /// Qubit state `(I + r . sigma)/2`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let m = (linalg::identity(2)
            + linalg::pauli_x() * c(r[0], 0.0)
            + linalg::pauli_y() * c(r[1], 0.0)
            + linalg::pauli_z() * c(r[2], 0.0))
            * c(0.5, 0.0);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.data
    }

    pub fn into_matrix(self) -> CMat {
        self.data
    }

    /// `(<sigma_x>, <sigma_y>, <sigma_z>)` for a qubit.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let ev = |p: CMat| (&self.data * p).trace().re;
        Ok([ev(linalg::pauli_x()), ev(linalg::pauli_y()), ev(linalg::pauli_z())])
    }

    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigh(&self.data).values
    }

    /// Number of eigenvalues above `cutoff * max_eigenvalue`.
    pub fn rank(&self, cutoff: f64) -> usize {
        let v = self.eigenvalues();
        let top = v.last().copied().unwrap_or(0.0);
        v.iter().filter(|&&l| l > cutoff * top).count()
    }

    pub fn expectation(&self, op: &CMat) -> Result<f64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.nrows() });
        }
        Ok((&self.data * op).trace().re)
    }
}

pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix { data: linalg::kron(&a.data, &b.data) }
}

/// Traces out factor `which` of a state on `dims[0] x dims[1] x ...`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], which: usize) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: total });
    }
    if which >= dims.len() {
        return Err(Error::InvalidArgument(format!("subsystem {which} out of range for {} factors", dims.len())));
    }
    let outer: usize = dims[..which].iter().product();
    let traced = dims[which];
    let inner: usize = dims[which + 1..].iter().product();
    let keep = outer * inner;
    let idx = |o: usize, t: usize, i: usize| (o * traced + t) * inner + i;
    let mut out = CMat::zeros(keep, keep);
    for o1 in 0..outer {
        for i1 in 0..inner {
            for o2 in 0..outer {
                for i2 in 0..inner {
                    let mut acc = c(0.0, 0.0);
                    for t in 0..traced {
                        acc += rho.data[(idx(o1, t, i1), idx(o2, t, i2))];
                    }
                    out[(o1 * inner + i1, o2 * inner + i2)] = acc;
                }
            }
        }
    }
    Ok(DensityMatrix { data: linalg::hermitian_part(&out) })
}
