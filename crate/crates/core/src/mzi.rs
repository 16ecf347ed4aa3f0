// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive phase estimation in a Mach-Zehnder interferometer with one
//! photon detected per round: two-mode Fock algebra, sequential detection
//! probabilities, Bayesian posteriors on a phase grid, the sharpness-based
//! online feedback rule, and offline feedback rules trained by particle
//! swarm optimization.

use std::f64::consts::PI;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::random::rng;

/// Default number of phase grid points on `[-pi, pi)`.
pub const GRID_SIZE: usize = 2048;
/// Default number of sampled trajectories for the offline objective.
pub const M_OFF_SAMPLES: usize = 2000;
/// Largest photon number for which the offline objective is summed exactly.
pub const MAX_EXACT_PHOTONS: usize = 16;

const SCAN_POINTS: usize = 64;
const GOLDEN_TOL: f64 = 1e-4;

/// Pure state of `N` photons in two modes, amplitudes over `|k, N-k>`
/// with `k` photons in mode `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFockState {
    amps: Vec<C64>,
}

impl TwoModeFockState {
    /// Normalized state from amplitudes over `k = 0..=N`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidState("a Fock state needs at least one amplitude".into()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("Fock state has squared norm {n2}")));
        }
        Ok(Self { amps })
    }

    /// `|k, n-k>`.
    pub fn fock(k: usize, n: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidArgument(format!("{k} photons exceed the total {n}")));
        }
        let mut amps = vec![c(0.0, 0.0); n + 1];
        amps[k] = c(1.0, 0.0);
        Ok(Self { amps })
    }

    /// State with the given coefficients over the `J_y` eigenstates
    /// `m = -N/2..=N/2`.
    pub fn from_jy_coefficients(coeffs: &[C64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidState("no coefficients".into()));
        }
        let n = coeffs.len() - 1;
        let basis = jy_eigenbasis(n);
        let v = basis * linalg::CVec::from_column_slice(coeffs);
        Self::new(v.iter().copied().collect())
    }

    /// Input state maximizing the sharpness for `n` photons.
    pub fn berry_wiseman(n: usize) -> Self {
        let coeffs: Vec<C64> = crate::stateopt::berry_wiseman_state(n).into_iter().map(|x| c(x, 0.0)).collect();
        Self::from_jy_coefficients(&coeffs).expect("normalized coefficients")
    }

    pub fn photons(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: self.amps.iter().map(|z| z / n).collect() })
    }

    fn moments(&self) -> Moments {
        moments(&self.amps)
    }
}

/// `a^dagger a`, `b^dagger b` and `2 Re <a^dagger b>`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Moments {
    a: f64,
    b: f64,
    x: f64,
}

fn moments(amps: &[C64]) -> Moments {
    let n = amps.len() - 1;
    let mut m = Moments { a: 0.0, b: 0.0, x: 0.0 };
    for (k, z) in amps.iter().enumerate() {
        let p = z.norm_sqr();
        m.a += k as f64 * p;
        m.b += (n - k) as f64 * p;
        if k < n {
            // a^dagger b |k, n-k> = sqrt((k+1)(n-k)) |k+1, n-k-1>
            let f = (((k + 1) * (n - k)) as f64).sqrt();
            m.x += 2.0 * (amps[k + 1].conj() * z).re * f;
        }
    }
    m
}

impl Moments {
    /// `<a_0^dagger a_0>` at `delta = phi - Phi`; the two ports sum to `a + b`.
    fn port0(&self, delta: f64) -> f64 {
        0.5 * (self.a * (1.0 - delta.cos()) + self.b * (1.0 + delta.cos()) + self.x * delta.sin())
    }
}

/// Port amplitudes `(s, c)` with `a_u = s a + c b`.
fn port_coefficients(phi: f64, big_phi: f64, u: u8) -> (f64, f64) {
    let th = 0.5 * (phi - big_phi) + 0.5 * PI * u as f64;
    (th.sin(), th.cos())
}

fn apply_port(amps: &[C64], s: f64, cc: f64, out: &mut [C64]) {
    let n = amps.len() - 1;
    for (k, o) in out.iter_mut().enumerate().take(n) {
        // a|k+1, n-k-1> = sqrt(k+1)|k, n-k-1>, b|k, n-k> = sqrt(n-k)|k, n-k-1>
        *o = amps[k + 1] * (s * ((k + 1) as f64).sqrt()) + amps[k] * (cc * ((n - k) as f64).sqrt());
    }
}

fn check_outcome(u: u8) -> Result<()> {
    if u > 1 {
        return Err(Error::InvalidArgument(format!("outcome {u} is not 0 or 1")));
    }
    Ok(())
}

/// `a_u |psi>` with `a_u = a sin(t + pi u/2) + b cos(t + pi u/2)`,
/// `t = (phi - Phi)/2`, and its squared norm.
pub fn output_mode_apply(state: &TwoModeFockState, phi: f64, big_phi: f64, u: u8) -> Result<(TwoModeFockState, f64)> {
    check_outcome(u)?;
    if state.photons() == 0 {
        return Err(Error::InvalidArgument("no photons left to detect".into()));
    }
    let (s, cc) = port_coefficients(phi, big_phi, u);
    let mut out = vec![c(0.0, 0.0); state.photons()];
    apply_port(&state.amps, s, cc, &mut out);
    let out = TwoModeFockState { amps: out };
    let n2 = out.norm_sqr();
    Ok((out, n2))
}

/// `<psi| a_u^dagger a_u |psi> / N` for a normalized state.
pub fn detection_prob(state: &TwoModeFockState, phi: f64, big_phi: f64, u: u8) -> Result<f64> {
    check_outcome(u)?;
    let n = state.photons();
    if n == 0 {
        return Err(Error::InvalidArgument("no photons left to detect".into()));
    }
    let p0 = state.moments().port0(phi - big_phi) / n as f64;
    Ok(if u == 0 { p0 } else { state.norm_sqr() - p0 }.clamp(0.0, 1.0))
}

/// Columns are the `J_y` eigenvectors for eigenvalues `-N/2..=N/2`,
/// obtained by rotating the Fock (`J_z`) basis with `exp(i pi J_x / 2)` so
/// that their relative phases are fixed.
pub fn jy_eigenbasis(n: usize) -> CMat {
    let (jx, _) = spin_operators(n);
    linalg::expm(&(jx * c(0.0, 0.5 * PI)))
}

/// `(J_x, J_y)` in the Fock basis with `J_z = (k - N/2)`.
pub fn spin_operators(n: usize) -> (CMat, CMat) {
    let d = n + 1;
    let mut ab = CMat::zeros(d, d);
    for k in 0..n {
        ab[(k + 1, k)] = c((((k + 1) * (n - k)) as f64).sqrt(), 0.0);
    }
    let jx = (&ab + ab.adjoint()) * c(0.5, 0.0);
    let jy = (&ab - ab.adjoint()) * c(0.0, -0.5);
    (jx, jy)
}

/// Discrete phase distribution on a uniform grid over `[-pi, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePrior {
    grid: Vec<f64>,
    weights: Vec<f64>,
}

pub fn phase_grid(size: usize) -> Vec<f64> {
    (0..size).map(|i| -PI + 2.0 * PI * i as f64 / size as f64).collect()
}

impl PhasePrior {
    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("phase grid needs at least one point".into()));
        }
        Ok(Self { grid: phase_grid(size), weights: vec![1.0 / size as f64; size] })
    }

    pub fn point_mass(size: usize, index: usize) -> Result<Self> {
        let mut w = vec![0.0; size];
        *w.get_mut(index).ok_or_else(|| Error::InvalidArgument(format!("index {index} off the grid")))? = 1.0;
        Self::from_weights(w)
    }

    /// Normalizes nonnegative weights on the default grid of the same size.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("phase grid needs at least one point".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptyPosterior);
        }
        let grid = phase_grid(weights.len());
        Ok(Self { grid, weights: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `sum_i w_i exp(i phi_i)`.
    pub fn mean_phasor(&self) -> C64 {
        self.grid.iter().zip(&self.weights).map(|(p, w)| C64::from_polar(*w, *p)).sum()
    }

    pub fn sharpness(&self) -> f64 {
        self.mean_phasor().norm()
    }

    /// `S^-2 - 1`, infinite for a flat distribution.
    pub fn holevo_variance(&self) -> f64 {
        holevo_variance(self.sharpness())
    }

    /// Argument of the mean phasor.
    pub fn estimate(&self) -> f64 {
        self.mean_phasor().arg()
    }
}

pub fn holevo_variance(sharpness: f64) -> f64 {
    if sharpness > 0.0 {
        sharpness.powi(-2) - 1.0
    } else {
        f64::INFINITY
    }
}

/// Posterior over the phase grid together with the normalized conditional
/// photon state at every grid point. The post-detection state depends on
/// the phase, so each grid point carries its own.
#[derive(Debug, Clone)]
pub struct Posterior {
    prior: PhasePrior,
    cos: Vec<f64>,
    sin: Vec<f64>,
    photons: usize,
    states: Vec<C64>,
}

/// Per-round coefficients of the outcome-0 phasor
/// `z0(Phi) = k0 + cos(Phi) k1 + sin(Phi) k2`.
#[derive(Debug, Clone, Copy)]
struct RoundCoefficients {
    total: C64,
    k0: C64,
    k1: C64,
    k2: C64,
}

impl RoundCoefficients {
    fn phasors(&self, big_phi: f64) -> (C64, C64) {
        let z0 = self.k0 + self.k1 * big_phi.cos() + self.k2 * big_phi.sin();
        (z0, self.total - z0)
    }

    /// Sharpness-weighted lookahead `sum_u p(u) S_u`.
    fn m_on(&self, big_phi: f64) -> f64 {
        let (z0, z1) = self.phasors(big_phi);
        z0.norm() + z1.norm()
    }
}

impl Posterior {
    pub fn new(prior: PhasePrior, input: &TwoModeFockState) -> Self {
        let dim = input.amps.len();
        let mut states = Vec::with_capacity(prior.len() * dim);
        for _ in 0..prior.len() {
            states.extend_from_slice(&input.amps);
        }
        let cos = prior.grid.iter().map(|p| p.cos()).collect();
        let sin = prior.grid.iter().map(|p| p.sin()).collect();
        Self { photons: input.photons(), prior, cos, sin, states }
    }

    pub fn prior(&self) -> &PhasePrior {
        &self.prior
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    /// Conditional state at grid point `i`.
    pub fn state_at(&self, i: usize) -> TwoModeFockState {
        let d = self.photons + 1;
        TwoModeFockState { amps: self.states[i * d..(i + 1) * d].to_vec() }
    }

    fn grid_moments(&self, i: usize) -> Moments {
        let d = self.photons + 1;
        moments(&self.states[i * d..(i + 1) * d])
    }

    /// `p(u | phi_i)` for every grid point.
    pub fn likelihoods(&self, big_phi: f64, u: u8) -> Result<Vec<f64>> {
        check_outcome(u)?;
        if self.photons == 0 {
            return Err(Error::InvalidArgument("no photons left to detect".into()));
        }
        let n = self.photons as f64;
        Ok((0..self.prior.len())
            .map(|i| {
                let p0 = (self.grid_moments(i).port0(self.prior.grid[i] - big_phi) / n).clamp(0.0, 1.0);
                if u == 0 {
                    p0
                } else {
                    1.0 - p0
                }
            })
            .collect())
    }

    fn round_coefficients(&self) -> RoundCoefficients {
        let n = self.photons as f64;
        let mut rc =
            RoundCoefficients { total: C64::default(), k0: C64::default(), k1: C64::default(), k2: C64::default() };
        for i in 0..self.prior.len() {
            let w = self.prior.weights[i];
            if w == 0.0 {
                continue;
            }
            let (cp, sp) = (self.cos[i], self.sin[i]);
            let e = c(w * cp, w * sp);
            let m = self.grid_moments(i);
            rc.total += e;
            rc.k0 += e * ((m.a + m.b) / (2.0 * n));
            rc.k1 += e * ((cp * (m.b - m.a) + sp * m.x) / (2.0 * n));
            rc.k2 += e * ((sp * (m.b - m.a) - cp * m.x) / (2.0 * n));
        }
        rc
    }

    /// Lookahead target `M_on(Phi) = sum_u |sum_i w_i p(u|phi_i) exp(i phi_i)|`.
    pub fn m_on(&self, big_phi: f64) -> f64 {
        self.round_coefficients().m_on(big_phi)
    }

    /// Bayes update on outcome `u` at feedback phase `Phi`. Returns the
    /// predictive probability of `u`.
    pub fn update(&mut self, big_phi: f64, u: u8) -> Result<f64> {
        let like = self.likelihoods(big_phi, u)?;
        let mut w: Vec<f64> = self.prior.weights.iter().zip(&like).map(|(a, b)| a * b).collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptyPosterior);
        }
        for x in &mut w {
            *x /= total;
        }
        let d = self.photons + 1;
        let mut next = vec![c(0.0, 0.0); self.prior.len() * self.photons];
        for i in 0..self.prior.len() {
            let out = &mut next[i * self.photons..(i + 1) * self.photons];
            let (s, cc) = port_coefficients(self.prior.grid[i], big_phi, u);
            apply_port(&self.states[i * d..(i + 1) * d], s, cc, out);
            let n2: f64 = out.iter().map(|z| z.norm_sqr()).sum();
            if n2 > 0.0 {
                let inv = 1.0 / n2.sqrt();
                out.iter_mut().for_each(|z| *z *= inv);
            } else {
                // Outcome impossible at this phase; its weight is already zero.
                w[i] = 0.0;
            }
        }
        self.prior.weights = w;
        self.states = next;
        self.photons -= 1;
        Ok(total)
    }
}

/// Feedback phase maximizing the lookahead target, by a grid scan followed
/// by golden-section refinement. The target is invariant under
/// `Phi -> Phi + pi`, which exchanges the two ports.
pub fn online_next_phase(posterior: &Posterior) -> Result<f64> {
    if posterior.photons == 0 {
        return Err(Error::InvalidArgument("no photons left to detect".into()));
    }
    let rc = posterior.round_coefficients();
    let h = 2.0 * PI / SCAN_POINTS as f64;
    let (mut best, mut best_v) = (-PI, f64::NEG_INFINITY);
    for k in 0..SCAN_POINTS {
        let p = -PI + k as f64 * h;
        let v = rc.m_on(p);
        if v > best_v {
            best = p;
            best_v = v;
        }
    }
    let (mut a, mut b) = (best - h, best + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (rc.m_on(x1), rc.m_on(x2));
    while b - a > GOLDEN_TOL {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = rc.m_on(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = rc.m_on(x2);
        }
    }
    let mid = 0.5 * (a + b);
    let cand = if rc.m_on(mid) >= best_v { mid } else { best };
    Ok(wrap_phase(cand))
}

/// Maps an angle into `[-pi, pi)`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        -PI
    } else {
        y
    }
}

/// Offline rule `Phi_m = Phi_{m-1} - (-1)^{u_{m-1}} dPhi_m` for `m >= 2`,
/// starting from `phi1`. `deltas[0]` is not used by the rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfflinePolicy {
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub phi1: f64,
}

impl OfflinePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.deltas.iter().chain([&self.phi1]).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Phase for round `m` (0-based) given the previous phase and outcome.
    fn next(&self, m: usize, prev_phase: f64, prev_u: u8) -> f64 {
        let sign = if prev_u == 0 { 1.0 } else { -1.0 };
        prev_phase - sign * self.deltas[m]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Policy {
    /// Maximize the one-step sharpness lookahead in every round.
    Online,
    Offline(OfflinePolicy),
    /// Same feedback phase in every round.
    Fixed {
        phi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub outcomes: Vec<u8>,
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub record: MeasurementRecord,
    pub posterior: PhasePrior,
    pub estimate: f64,
    pub sharpness: f64,
    pub holevo_variance: f64,
}

fn feedback_phase(policy: &Policy, post: &Posterior, record: &MeasurementRecord) -> Result<f64> {
    let m = record.outcomes.len();
    Ok(match policy {
        Policy::Online => online_next_phase(post)?,
        Policy::Fixed { phi } => *phi,
        Policy::Offline(off) => {
            if m == 0 {
                off.phi1
            } else {
                off.next(m, record.phases[m - 1], record.outcomes[m - 1])
            }
        }
    })
}

fn check_policy(policy: &Policy, photons: usize) -> Result<()> {
    match policy {
        Policy::Offline(off) => {
            off.validate()?;
            if off.deltas.len() != photons {
                return Err(Error::DimensionMismatch { expected: photons, found: off.deltas.len() });
            }
        }
        Policy::Fixed { phi } if !phi.is_finite() => return Err(Error::NonFinite),
        _ => {}
    }
    Ok(())
}

/// Runs one adaptive experiment with all photons of `input`, sampling the
/// outcomes at `phi_true` from a generator seeded by `seed`.
pub fn simulate_adaptive(
    policy: &Policy,
    input: &TwoModeFockState,
    phi_true: f64,
    grid_size: usize,
    seed: u64,
) -> Result<AdaptiveRun> {
    check_policy(policy, input.photons())?;
    if !phi_true.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut r = rng(seed);
    let mut post = Posterior::new(PhasePrior::uniform(grid_size)?, input);
    let mut truth = input.clone();
    let mut record = MeasurementRecord { outcomes: Vec::new(), phases: Vec::new() };
    while truth.photons() > 0 {
        let big_phi = feedback_phase(policy, &post, &record)?;
        let p0 = detection_prob(&truth, phi_true, big_phi, 0)?;
        let u = if r.random::<f64>() < p0 { 0 } else { 1 };
        truth = output_mode_apply(&truth, phi_true, big_phi, u)?.0.normalized()?;
        post.update(big_phi, u)?;
        record.outcomes.push(u);
        record.phases.push(big_phi);
    }
    let prior = post.prior.clone();
    let s = prior.sharpness();
    Ok(AdaptiveRun {
        estimate: prior.estimate(),
        sharpness: s,
        holevo_variance: holevo_variance(s),
        posterior: prior,
        record,
    })
}

/// Final posterior sharpness of one trajectory of the offline rule with
/// the true phase at grid point `index` and outcome uniforms `draws`.
fn offline_trajectory(
    policy: &OfflinePolicy,
    input: &TwoModeFockState,
    grid_size: usize,
    index: usize,
    draws: &[f64],
) -> Result<f64> {
    let mut post = Posterior::new(PhasePrior::uniform(grid_size)?, input);
    let mut phase = policy.phi1;
    let mut prev_u = 0;
    for (m, &draw) in draws.iter().enumerate() {
        if m > 0 {
            phase = policy.next(m, phase, prev_u);
        }
        let p0 = detection_prob(&post.state_at(index), post.prior.grid[index], phase, 0)?;
        let u = if draw < p0 { 0 } else { 1 };
        post.update(phase, u)?;
        prev_u = u;
    }
    Ok(post.prior.sharpness())
}

/// Sampled estimate of `M_off = sum_u |int p(u|phi) p_in(phi) exp(i phi)|`
/// under a uniform prior: the mean final sharpness over trajectories whose
/// true phase is drawn from the prior.
pub fn m_off(
    policy: &OfflinePolicy,
    input: &TwoModeFockState,
    samples: usize,
    grid_size: usize,
    seed: u64,
) -> Result<f64> {
    check_policy(&Policy::Offline(policy.clone()), input.photons())?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sampled trajectory".into()));
    }
    if grid_size == 0 {
        return Err(Error::InvalidArgument("phase grid needs at least one point".into()));
    }
    let n = input.photons();
    let mut r = rng(seed);
    let plan: Vec<(usize, Vec<f64>)> =
        (0..samples).map(|_| (r.random_range(0..grid_size), (0..n).map(|_| r.random::<f64>()).collect())).collect();
    let total = plan
        .par_iter()
        .map(|(i, d)| offline_trajectory(policy, input, grid_size, *i, d))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum::<f64>();
    Ok(total / samples as f64)
}

/// `M_off` summed over all `2^N` outcome strings.
pub fn m_off_exact(policy: &OfflinePolicy, input: &TwoModeFockState, grid_size: usize) -> Result<f64> {
    check_policy(&Policy::Offline(policy.clone()), input.photons())?;
    let n = input.photons();
    if n > MAX_EXACT_PHOTONS {
        return Err(Error::InvalidArgument(format!("exact enumeration is limited to {MAX_EXACT_PHOTONS} photons")));
    }
    if grid_size == 0 {
        return Err(Error::InvalidArgument("phase grid needs at least one point".into()));
    }
    let grid = phase_grid(grid_size);
    let mut bufs: Vec<Vec<C64>> = (0..=n).map(|m| vec![c(0.0, 0.0); grid_size * (n + 1 - m)]).collect();
    for i in 0..grid_size {
        bufs[0][i * (n + 1)..(i + 1) * (n + 1)].copy_from_slice(&input.amps);
    }
    // 1/N! turns the squared norm of a_u1...a_uN |psi> into p(u|phi).
    let inv_fact: f64 = (1..=n).map(|k| 1.0 / k as f64).product();
    let e = ExactEnumeration {
        policy,
        n,
        half_cos: grid.iter().map(|p| (0.5 * p).cos()).collect(),
        half_sin: grid.iter().map(|p| (0.5 * p).sin()).collect(),
        phasor: grid.iter().map(|p| C64::from_polar(inv_fact / grid_size as f64, *p)).collect(),
    };
    Ok(e.branch(&mut bufs, 0, policy.phi1))
}

/// Depth-first sum over outcome strings, carrying the unnormalized states
/// `a_u_m ... a_u_1 |psi>` at every grid point in one buffer per depth.
struct ExactEnumeration<'a> {
    policy: &'a OfflinePolicy,
    n: usize,
    half_cos: Vec<f64>,
    half_sin: Vec<f64>,
    phasor: Vec<C64>,
}

impl ExactEnumeration<'_> {
    fn branch(&self, bufs: &mut [Vec<C64>], m: usize, phase: f64) -> f64 {
        if m == self.n {
            let leaf = &bufs[m];
            return leaf.iter().zip(&self.phasor).map(|(z, e)| e * z.norm_sqr()).sum::<C64>().norm();
        }
        let (cb, sb) = ((0.5 * phase).cos(), (0.5 * phase).sin());
        let d = self.n + 1 - m;
        let mut total = 0.0;
        for u in 0..2u8 {
            {
                let (head, tail) = bufs.split_at_mut(m + 1);
                let (src, dst) = (&head[m], &mut tail[0]);
                for i in 0..self.half_cos.len() {
                    // sin and cos of (phi_i - Phi)/2
                    let sn = self.half_sin[i] * cb - self.half_cos[i] * sb;
                    let cs = self.half_cos[i] * cb + self.half_sin[i] * sb;
                    let (s, cc) = if u == 0 { (sn, cs) } else { (cs, -sn) };
                    apply_port(&src[i * d..(i + 1) * d], s, cc, &mut dst[i * (d - 1)..(i + 1) * (d - 1)]);
                }
            }
            let next = if m + 1 < self.n { self.policy.next(m + 1, phase, u) } else { phase };
            total += self.branch(bufs, m + 1, next);
        }
        total
    }
}

/// How the PSO objective is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MoffEstimator {
    Exact,
    /// Sampled with the same seed for every candidate, so that candidates
    /// are compared on common random numbers.
    Sampled {
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoConfig {
    pub particles: usize,
    pub rounds: usize,
    /// Inertia weight.
    pub c0: f64,
    /// Attraction to the personal best.
    pub c1: f64,
    /// Attraction to the global best.
    pub c2: f64,
    pub seed: u64,
    pub grid_size: usize,
    pub estimator: MoffEstimator,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            particles: 20,
            rounds: 50,
            c0: 0.729,
            c1: 1.49,
            c2: 1.49,
            seed: 0,
            grid_size: GRID_SIZE,
            estimator: MoffEstimator::Exact,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        let w = [self.c0, self.c1, self.c2];
        if self.particles < 1 || self.rounds < 1 || self.grid_size < 1 {
            return Err(Error::InvalidArgument("particles, rounds and grid size must be positive".into()));
        }
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument(format!("PSO weights must be finite and nonnegative: {w:?}")));
        }
        if let MoffEstimator::Sampled { samples: 0 } = self.estimator {
            return Err(Error::InvalidArgument("need at least one sampled trajectory".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub policy: OfflinePolicy,
    pub best_value: f64,
    /// Global-best objective after each round.
    pub history: Vec<f64>,
    /// Mean objective of the random initial particles.
    pub initial_mean: f64,
}

/// Particle swarm search over the offline increments `dPhi_1..dPhi_N` with
/// `Phi_1 = 0`.
pub fn pso_offline(input: &TwoModeFockState, config: &PsoConfig) -> Result<PsoResult> {
    config.validate()?;
    let n = input.photons();
    if n == 0 {
        return Err(Error::InvalidArgument("input has no photons".into()));
    }
    let objective = |deltas: &[f64]| -> Result<f64> {
        let p = OfflinePolicy { deltas: deltas.to_vec(), phi1: 0.0 };
        match config.estimator {
            MoffEstimator::Exact => m_off_exact(&p, input, config.grid_size),
            MoffEstimator::Sampled { samples } => {
                m_off(&p, input, samples, config.grid_size, config.seed ^ 0x9e37_79b9_7f4a_7c15)
            }
        }
    };
    let mut r = rng(config.seed);
    let mut x: Vec<Vec<f64>> =
        (0..config.particles).map(|_| (0..n).map(|_| r.random_range(-PI..PI)).collect()).collect();
    let mut v = vec![vec![0.0; n]; config.particles];
    let mut pb = x.clone();
    let mut pb_val = vec![f64::NEG_INFINITY; config.particles];
    let mut gb = x[0].clone();
    let mut gb_val = f64::NEG_INFINITY;
    let mut history = Vec::with_capacity(config.rounds);
    let mut initial_mean = 0.0;
    for round in 0..config.rounds {
        let vals = x.par_iter().map(|p| objective(p)).collect::<Result<Vec<f64>>>()?;
        if round == 0 {
            initial_mean = vals.iter().sum::<f64>() / vals.len() as f64;
        }
        for i in 0..config.particles {
            if vals[i] > pb_val[i] {
                pb_val[i] = vals[i];
                pb[i] = x[i].clone();
            }
        }
        for i in 0..config.particles {
            if pb_val[i] > gb_val {
                gb_val = pb_val[i];
                gb = pb[i].clone();
            }
        }
        history.push(gb_val);
        for i in 0..config.particles {
            for k in 0..n {
                let r1: f64 = r.random();
                let r2: f64 = r.random();
                v[i][k] =
                    config.c0 * v[i][k] + r1 * config.c1 * (pb[i][k] - x[i][k]) + r2 * config.c2 * (gb[k] - x[i][k]);
                x[i][k] += v[i][k];
            }
        }
    }
    Ok(PsoResult { policy: OfflinePolicy { deltas: gb, phi1: 0.0 }, best_value: gb_val, history, initial_mean })
}

/// `(phi_i, p(0|phi_i), p(1|phi_i))` of the first detection on the grid.
pub fn likelihood_table(input: &TwoModeFockState, big_phi: f64, grid_size: usize) -> Result<Vec<(f64, f64, f64)>> {
    let post = Posterior::new(PhasePrior::uniform(grid_size)?, input);
    let p0 = post.likelihoods(big_phi, 0)?;
    let p1 = post.likelihoods(big_phi, 1)?;
    Ok(post.prior.grid.iter().zip(p0.iter().zip(&p1)).map(|(&g, (&a, &b))| (g, a, b)).collect())
}
