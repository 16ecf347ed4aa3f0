// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! States, Kraus channels, Lindblad dynamics and tensor algebra.

mod json;
mod kraus;
mod lindblad;
mod state;

pub use json::{matrix_from_json, matrix_to_json, MatrixJson};
pub use kraus::{completeness_residual, dephasing_channel, KrausChannel};
pub use lindblad::{
    apply_superoperator, dissipator_superoperator, evolve_lindblad, evolve_unitary, hamiltonian_superoperator,
    lindblad_superoperator, LindbladModel,
};
pub use state::{partial_trace, tensor, DensityMatrix, PureState, STATE_TOL};

/// `sum_j K_j rho K_j^dagger`.
pub fn apply_channel(channel: &KrausChannel, state: &DensityMatrix) -> crate::Result<DensityMatrix> {
    channel.apply(state)
}

pub fn kraus_transform(channel: &KrausChannel, isometry: &crate::linalg::CMat) -> crate::Result<KrausChannel> {
    channel.transform(isometry)
}
