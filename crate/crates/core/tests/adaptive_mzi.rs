// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use metrokit::mzi::{
    detection_prob, likelihood_table, m_off, m_off_exact, pso_offline, simulate_adaptive, OfflinePolicy, PhasePrior,
    Policy, Posterior, PsoConfig, TwoModeFockState, GRID_SIZE,
};
use metrokit::random::rng;
use rand::Rng;
use rayon::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn true_phase(seed: u64) -> f64 {
    rng(seed ^ 0xabcdef).random_range(-PI..PI)
}

#[test]
fn single_photon_likelihood_table() {
    let a = TwoModeFockState::fock(1, 1).unwrap();
    for (phi, p0, p1) in likelihood_table(&a, 0.25, GRID_SIZE).unwrap() {
        let t = 0.5 * (phi - 0.25);
        assert!((p0 - t.sin().powi(2)).abs() < 1e-15);
        assert!((p1 - t.cos().powi(2)).abs() < 1e-15);
    }
    let s = TwoModeFockState::berry_wiseman(1);
    for (phi, p0, p1) in likelihood_table(&s, -0.6, 256).unwrap() {
        assert!((p0 + p1 - 1.0).abs() < 1e-14);
        assert!((p0 - detection_prob(&s, phi, -0.6, 0).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn balanced_single_photon_outcomes() {
    let a = TwoModeFockState::fock(1, 1).unwrap();
    assert!((detection_prob(&a, 0.0, PI / 2.0, 0).unwrap() - 0.5).abs() < 1e-15);
    assert!((detection_prob(&a, 0.0, PI / 2.0, 1).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn posterior_stays_normalized() {
    let s = TwoModeFockState::berry_wiseman(6);
    for seed in 0..5 {
        let mut r = rng(seed);
        let mut post = Posterior::new(PhasePrior::uniform(GRID_SIZE).unwrap(), &s);
        while post.photons() > 0 {
            let big = r.random_range(-PI..PI);
            let u = r.random_range(0..2u8);
            post.update(big, u).unwrap();
            let total: f64 = post.prior().weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn online_beats_fixed_phase() {
    let s = TwoModeFockState::berry_wiseman(8);
    let run = |policy: &Policy| -> Vec<f64> {
        (0..500u64)
            .into_par_iter()
            .map(|seed| simulate_adaptive(policy, &s, true_phase(seed), GRID_SIZE, seed).unwrap().holevo_variance)
            .collect()
    };
    let online = median(run(&Policy::Online));
    let fixed = median(run(&Policy::Fixed { phi: 0.0 }));
    println!("median Holevo variance: online {online:.4}, fixed {fixed:.4}");
    assert!(online < fixed);
}

#[test]
fn sharpness_grows_with_photons() {
    let med = |n: usize| {
        let s = TwoModeFockState::berry_wiseman(n);
        median(
            (0..100u64)
                .into_par_iter()
                .map(|seed| simulate_adaptive(&Policy::Online, &s, true_phase(seed), 512, seed).unwrap().sharpness)
                .collect(),
        )
    };
    let s: Vec<f64> = [1, 2, 4, 8].iter().map(|&n| med(n)).collect();
    for w in s.windows(2) {
        assert!(w[1] >= w[0], "{s:?}");
    }
}

#[test]
fn m_off_sampling_is_unbiased() {
    let s = TwoModeFockState::berry_wiseman(2);
    let p = OfflinePolicy { deltas: vec![0.0, 1.1], phi1: 0.2 };
    let exact = m_off_exact(&p, &s, 512).unwrap();
    let est: Vec<f64> = (0..20).map(|seed| m_off(&p, &s, 500, 512, seed).unwrap()).collect();
    let mean = est.iter().sum::<f64>() / 20.0;
    let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 19.0;
    let se = (var / 20.0).sqrt();
    assert!((mean - exact).abs() <= 2.0 * se.max(1e-3), "{mean} vs {exact} (se {se})");
}

#[test]
fn informative_rule_beats_constant_phase() {
    let s = TwoModeFockState::berry_wiseman(3);
    let flat = OfflinePolicy { deltas: vec![0.0; 3], phi1: 0.0 };
    let turning = OfflinePolicy { deltas: vec![0.0, PI / 2.0, PI / 4.0], phi1: 0.0 };
    let a = m_off_exact(&flat, &s, 1024).unwrap();
    let b = m_off_exact(&turning, &s, 1024).unwrap();
    assert!(b > a, "{b} <= {a}");
}

#[test]
fn pso_improves_on_random_rules() {
    let s = TwoModeFockState::berry_wiseman(4);
    let wins = (0..20u64)
        .filter(|&seed| {
            let cfg = PsoConfig { seed, ..Default::default() };
            let r = pso_offline(&s, &cfg).unwrap();
            for w in r.history.windows(2) {
                assert!(w[1] >= w[0]);
            }
            r.best_value > r.initial_mean
        })
        .count();
    assert!(wins >= 18, "{wins}/20");
}

#[test]
fn single_particle_pure_inertia() {
    let s = TwoModeFockState::berry_wiseman(2);
    let cfg = PsoConfig { particles: 1, rounds: 6, c1: 0.0, c2: 0.0, grid_size: 256, ..Default::default() };
    let r = pso_offline(&s, &cfg).unwrap();
    assert!(r.history.iter().all(|&h| h == r.history[0]));
    assert_eq!(r.best_value, r.initial_mean);
}
