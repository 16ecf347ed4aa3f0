// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use metrokit::channel::{
    ancilla_free_check, channel_fidelity, channel_qfi_fd, default_channel_dx, metrology_matrix, n_use_bound,
    optimal_probe, EncodedChannel, ParameterizedChannel,
};
use metrokit::fisher::sld;
use metrokit::linalg::{self, c, pauli_z, CMat};
use metrokit::qcore::{DensityMatrix, KrausChannel};
use metrokit::random::{random_density_matrix, random_hermitian, random_isometry, rng, Rng};

fn random_encoded(r: &mut Rng, m: usize) -> EncodedChannel {
    let v = random_isometry(r, 2 * m, 2);
    let noise = (0..m).map(|k| v.rows(2 * k, 2).into_owned()).collect();
    EncodedChannel::new(noise, random_hermitian(r, 2)).unwrap()
}

#[test]
fn dephasing_channel_qfi_both_routes() {
    for p in [0.6, 0.75, 0.9] {
        let pc = EncodedChannel::dephasing(p).unwrap();
        let x = 0.3;
        let dx = default_channel_dx(x);
        let expected = 4.0 * (2.0 * p - 1.0f64).powi(2);
        let fd = channel_qfi_fd(&pc, x, dx).unwrap();
        let probe = optimal_probe(&pc, x, dx).unwrap();
        assert!((fd - expected).abs() < 1e-3, "p={p}: fidelity route {fd} vs {expected}");
        assert!((probe.qfi - expected).abs() < 1e-3, "p={p}: probe route {} vs {expected}", probe.qfi);
        assert!(ancilla_free_check(&pc, x, x + dx).unwrap());
        assert!(probe.rho.purity() > 1.0 - 1e-6, "purity {}", probe.rho.purity());
    }
}

#[test]
fn unitary_channel_qfi() {
    let pc = EncodedChannel::unitary(pauli_z()).unwrap();
    let fd = channel_qfi_fd(&pc, 0.2, default_channel_dx(0.2)).unwrap();
    assert!((fd - 4.0).abs() < 1e-3, "{fd}");
    let probe = optimal_probe(&pc, 0.2, default_channel_dx(0.2)).unwrap();
    assert!((probe.qfi - 4.0).abs() < 1e-3);
    assert!(probe.rho.purity() > 1.0 - 1e-6);
    let r = probe.rho.bloch_vector().unwrap();
    assert!(r[2].abs() < 1e-6, "probe must lie on the equator: {r:?}");
}

#[test]
fn random_channels_agree_across_routes() {
    let mut r = rng(21);
    for trial in 0..20 {
        let m = 1 + trial % 4;
        let pc = random_encoded(&mut r, m);
        let x = 0.1;
        let dx = default_channel_dx(x);
        let a = channel_qfi_fd(&pc, x, dx).unwrap();
        let b = optimal_probe(&pc, x, dx).unwrap().qfi;
        assert!((a - b).abs() <= 1e-3 * a.abs().max(b.abs()), "trial {trial}: {a} vs {b}");
        let e = pc.kraus(x).unwrap();
        assert!((channel_fidelity(&e, &e).unwrap().value - 1.0).abs() < 1e-7);
    }
}

#[test]
fn probe_beats_fixed_inputs() {
    let mut r = rng(22);
    for _ in 0..5 {
        let pc = random_encoded(&mut r, 2);
        let x = 0.4;
        let best = optimal_probe(&pc, x, default_channel_dx(x)).unwrap().qfi;
        let rho = random_density_matrix(&mut r, 2);
        let out = pc.kraus(x).unwrap().apply(&rho).unwrap();
        let mut drho = CMat::zeros(2, 2);
        let k = pc.kraus(x).unwrap();
        for (kj, dj) in k.kraus().iter().zip(pc.kraus_derivative(x).unwrap()) {
            drho += &dj * rho.matrix() * kj.adjoint() + kj * rho.matrix() * dj.adjoint();
        }
        let fixed = sld(&out, &drho).unwrap().qfi;
        assert!(best >= fixed - 1e-6, "{best} < {fixed}");
        let bound = n_use_bound(&pc, x, 1, 400).unwrap();
        let fd = channel_qfi_fd(&pc, x, default_channel_dx(x)).unwrap();
        assert!(bound.value >= fd - 1e-4, "{} < {fd}", bound.value);
    }
}

#[test]
fn n_use_bound_examples() {
    let pc = EncodedChannel::unitary(pauli_z()).unwrap();
    let b1 = n_use_bound(&pc, 0.0, 1, 200).unwrap();
    assert!((b1.value - 4.0).abs() < 1e-6, "{}", b1.value);
    assert!(!b1.sql);
    let b2 = n_use_bound(&pc, 0.0, 2, 200).unwrap();
    assert!((b2.value - 32.0).abs() < 1e-6, "{}", b2.value);
    let deph = EncodedChannel::dephasing(0.75).unwrap();
    assert!(n_use_bound(&deph, 0.0, 3, 200).unwrap().sql);
}

#[test]
fn metrology_matrix_properties() {
    let mut r = rng(23);
    let pc = random_encoded(&mut r, 3);
    let rho1 = random_density_matrix(&mut r, 2);
    let rho2 = random_density_matrix(&mut r, 2);
    let m = metrology_matrix(&rho1, &pc, 0.3, 0.3).unwrap();
    assert!(linalg::trace_norm(&m) <= 1.0 + 1e-9);
    let a = 0.3;
    let mix = DensityMatrix::new(rho1.matrix() * c(a, 0.0) + rho2.matrix() * c(1.0 - a, 0.0)).unwrap();
    let lhs = metrology_matrix(&mix, &pc, 0.1, 0.5).unwrap();
    let rhs = metrology_matrix(&rho1, &pc, 0.1, 0.5).unwrap() * c(a, 0.0)
        + metrology_matrix(&rho2, &pc, 0.1, 0.5).unwrap() * c(1.0 - a, 0.0);
    assert!(linalg::max_abs(&(lhs - rhs)) < 1e-14);
    let u = EncodedChannel::unitary(pauli_z()).unwrap();
    let mu = metrology_matrix(&rho1, &u, 0.2, 0.2).unwrap();
    assert!((linalg::trace_norm(&mu) - 1.0).abs() < 1e-12);
}

#[test]
fn padding_leaves_fidelity_unchanged() {
    let pc = EncodedChannel::dephasing(0.8).unwrap();
    let e1 = pc.kraus(0.0).unwrap();
    let e2 = pc.kraus(0.3).unwrap();
    let padded = KrausChannel::new(e2.padded(4).kraus().to_vec()).unwrap();
    let a = channel_fidelity(&e1, &e2).unwrap().value;
    let b = channel_fidelity(&e1, &padded).unwrap().value;
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
}
