// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Probe-state optimization: closed-form optima for unitary encodings,
//! optimal mixed probes with a fixed spectrum, interferometer and
//! thermometry optimality conditions, and simplex search over Dicke
//! superpositions under dephasing.

mod nelder_mead;
mod probes;
mod spin;

pub use nelder_mead::{
    coordinate_simplex, nelder_mead, nelder_mead_with_history, IterationRecord, NelderMeadConfig, NelderMeadResult,
};
pub use probes::{
    berry_wiseman_state, ffb_optimal_mixed, ffb_upper_bound, generator_hamiltonian, gibbs_mean_energy,
    mzi_coherent_squeezed_qfi, optimal_unitary_probe, thermometer_residual, FfbBound, GeneratorSpectrum,
    UnitaryOptimum, DEGENERACY_TOL,
};
pub use spin::{
    ghz_coeffs, initial_simplex, optimize_dicke, spin_dephasing_objective, symmetric_coeffs, symmetric_param_count,
    uniform_coeffs, CollectiveKernel, DephasingKind, DickeOptimum, SpinModel, MAX_COLLECTIVE_QUBITS, MAX_LOCAL_QUBITS,
};
