// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::qcore::state::{DensityMatrix, STATE_TOL};

/// Markovian master equation
/// `d rho/dt = -i[H, rho] + sum_k g_k (G_k rho G_k^dagger - {G_k^dagger G_k, rho}/2)`.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: CMat,
    lindblad_ops: Vec<CMat>,
    rates: Vec<f64>,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMat, lindblad_ops: Vec<CMat>, rates: Vec<f64>) -> Result<Self> {
        linalg::ensure_hermitian(&hamiltonian, STATE_TOL)?;
        let d = hamiltonian.nrows();
        if lindblad_ops.len() != rates.len() {
            return Err(Error::DimensionMismatch { expected: lindblad_ops.len(), found: rates.len() });
        }
        for op in &lindblad_ops {
            if op.shape() != (d, d) {
                return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
            }
        }
        if let Some(&r) = rates.iter().find(|r| !(**r >= 0.0)) {
            return Err(Error::NegativeRate(r));
        }
        Ok(Self { hamiltonian: linalg::hermitian_part(&hamiltonian), lindblad_ops, rates })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn lindblad_ops(&self) -> &[CMat] {
        &self.lindblad_ops
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Generator acting on column-stacked `vec(rho)`.
    pub fn superoperator(&self) -> CMat {
        lindblad_superoperator(&self.hamiltonian, &self.lindblad_ops, &self.rates)
    }

    pub fn evolve(&self, t: f64, steps: usize, state: &DensityMatrix) -> Result<DensityMatrix> {
        evolve_lindblad(self, t, steps, state)
    }
}

/// Superoperator of the commutator part, `-i(I kron H - H^T kron I)`.
pub fn hamiltonian_superoperator(h: &CMat) -> CMat {
    let id = linalg::identity(h.nrows());
    (linalg::kron(&id, h) - linalg::kron(&h.transpose(), &id)) * c(0.0, -1.0)
}

/// Superoperator of one dissipator `G rho G^dagger - {G^dagger G, rho}/2`.
pub fn dissipator_superoperator(g: &CMat) -> CMat {
    let id = linalg::identity(g.nrows());
    let gg = g.adjoint() * g;
    linalg::kron(&g.conjugate(), g) - (linalg::kron(&id, &gg) + linalg::kron(&gg.transpose(), &id)) * c(0.5, 0.0)
}

pub fn lindblad_superoperator(h: &CMat, ops: &[CMat], rates: &[f64]) -> CMat {
    let mut l = hamiltonian_superoperator(h);
    for (g, &r) in ops.iter().zip(rates) {
        if r != 0.0 {
            l += dissipator_superoperator(g) * c(r, 0.0);
        }
    }
    l
}

/// Applies a superoperator to a matrix.
pub fn apply_superoperator(s: &CMat, m: &CMat) -> CMat {
    let v = s * linalg::vec_col(m);
    linalg::unvec_col(&v, m.nrows(), m.ncols())
}

pub fn evolve_lindblad(model: &LindbladModel, t: f64, steps: usize, state: &DensityMatrix) -> Result<DensityMatrix> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("evolution time {t} must be nonnegative")));
    }
    if state.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: state.dim() });
    }
    let dt = t / steps as f64;
    let prop = linalg::expm(&(model.superoperator() * c(dt, 0.0)));
    let mut rho = state.matrix().clone();
    for _ in 0..steps {
        rho = linalg::hermitian_part(&apply_superoperator(&prop, &rho));
    }
    Ok(DensityMatrix::from_propagated(rho))
}

pub fn evolve_unitary(h: &CMat, t: f64, state: &DensityMatrix) -> Result<DensityMatrix> {
    linalg::ensure_hermitian(h, STATE_TOL)?;
    if h.nrows() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: h.nrows() });
    }
    let u = linalg::unitary_from_hamiltonian(&linalg::hermitian_part(h), t);
    Ok(DensityMatrix::from_propagated(&u * state.matrix() * u.adjoint()))
}
