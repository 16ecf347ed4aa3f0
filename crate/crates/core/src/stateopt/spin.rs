// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Frequency estimation with N spins under dephasing, restricted to probes
//! in the symmetric (Dicke) subspace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher;
use crate::linalg::{c, CMat, C64};
use crate::qcore::DensityMatrix;
use crate::stateopt::nelder_mead::{nelder_mead_with_history, IterationRecord, NelderMeadConfig};
use crate::stateopt::probes::berry_wiseman_state;

/// Local dephasing is simulated on the full `2^N` space.
pub const MAX_LOCAL_QUBITS: usize = 8;
pub const MAX_COLLECTIVE_QUBITS: usize = 256;

/// Coherence decay between `S_z` eigenvalues `m`, `m'` under collective
/// dephasing, as a function of `(m - m')^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CollectiveKernel {
    /// Integrates the rate `gamma / (1 - exp(-gamma t))` from `t0` to `T`:
    /// factor `((exp(gamma t0) - 1) / (exp(gamma T) - 1))^{(m-m')^2}`.
    /// The rate diverges like `1/t` at the origin, so the factor vanishes as
    /// `t0 -> 0`.
    Integrated { t0: f64 },
    /// Constant-rate double commutator `-gamma [S_z, [S_z, rho]]`:
    /// factor `exp(-gamma T (m-m')^2)`.
    Markovian,
}

/// Decay factor of the coherence between two basis states.
type CoherenceDecay = Box<dyn Fn(usize, usize) -> f64>;

impl CollectiveKernel {
    pub fn factor(&self, gamma: f64, t: f64, delta_sq: f64) -> f64 {
        if delta_sq == 0.0 {
            return 1.0;
        }
        match *self {
            CollectiveKernel::Markovian => (-gamma * t * delta_sq).exp(),
            CollectiveKernel::Integrated { t0 } => {
                let ratio = if gamma > 0.0 { (gamma * t0).exp_m1() / (gamma * t).exp_m1() } else { t0 / t };
                ratio.powf(delta_sq)
            }
        }
    }
}

impl Default for CollectiveKernel {
    fn default() -> Self {
        CollectiveKernel::Integrated { t0: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DephasingKind {
    /// `(gamma/2) sum_i (sigma_z^i rho sigma_z^i - rho)`.
    Local,
    Collective {
        #[serde(default)]
        kernel: CollectiveKernel,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinModel {
    n: usize,
    omega: f64,
    gamma: f64,
    kind: DephasingKind,
    coeffs: Vec<C64>,
}

impl SpinModel {
    /// `coeffs[k]` multiplies the Dicke state `|N/2, k - N/2>`.
    pub fn new(n: usize, omega: f64, gamma: f64, kind: DephasingKind, coeffs: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one spin".into()));
        }
        let limit = match kind {
            DephasingKind::Local => MAX_LOCAL_QUBITS,
            DephasingKind::Collective { .. } => MAX_COLLECTIVE_QUBITS,
        };
        if n > limit {
            return Err(Error::InvalidArgument(format!("N = {n} exceeds the limit {limit} for {kind:?}")));
        }
        if !(gamma >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument("need finite omega and gamma >= 0".into()));
        }
        if coeffs.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, found: coeffs.len() });
        }
        let norm: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("coefficient norm {norm} differs from 1")));
        }
        if let DephasingKind::Collective { kernel: CollectiveKernel::Integrated { t0 } } = kind {
            if !(t0 > 0.0) {
                return Err(Error::InvalidArgument("integration start t0 must be positive".into()));
            }
        }
        Ok(Self { n, omega, gamma, kind, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn with_coeffs(&self, coeffs: Vec<C64>) -> Result<Self> {
        Self::new(self.n, self.omega, self.gamma, self.kind, coeffs)
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.n, omega, self.gamma, self.kind, self.coeffs.clone())
    }

    /// Evolved state at time `t` and its derivative with respect to omega.
    pub fn evolve(&self, t: f64) -> Result<(DensityMatrix, CMat)> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("time {t} must be positive")));
        }
        let (amps, m, distance): (Vec<C64>, Vec<f64>, CoherenceDecay) = match self.kind {
            DephasingKind::Local => {
                let (amps, m) = embed_dicke(self.n, &self.coeffs);
                let gamma = self.gamma;
                (amps, m, Box::new(move |a, b| (-gamma * t * ((a ^ b).count_ones() as f64)).exp()))
            }
            DephasingKind::Collective { kernel } => {
                let m: Vec<f64> = (0..=self.n).map(|k| k as f64 - self.n as f64 / 2.0).collect();
                let mm = m.clone();
                let gamma = self.gamma;
                (self.coeffs.clone(), m, Box::new(move |a, b| kernel.factor(gamma, t, (mm[a] - mm[b]).powi(2))))
            }
        };
        let dim = amps.len();
        let mut rho = CMat::zeros(dim, dim);
        let mut drho = CMat::zeros(dim, dim);
        for a in 0..dim {
            if amps[a] == c(0.0, 0.0) {
                continue;
            }
            for b in 0..dim {
                if amps[b] == c(0.0, 0.0) {
                    continue;
                }
                let dm = m[a] - m[b];
                let phase = C64::from_polar(1.0, -self.omega * dm * t);
                let v = amps[a] * amps[b].conj() * phase * distance(a, b);
                rho[(a, b)] = v;
                drho[(a, b)] = v * c(0.0, -t * dm);
            }
        }
        Ok((DensityMatrix::from_propagated(rho), drho))
    }

    pub fn qfi(&self, t: f64) -> Result<f64> {
        let (rho, drho) = self.evolve(t)?;
        Ok(fisher::sld(&rho, &drho)?.qfi)
    }
}

/// Dicke coefficients embedded in the `2^N` computational basis; also
/// returns the `S_z` eigenvalue `(#0 - #1)/2` of every basis string.
fn embed_dicke(n: usize, coeffs: &[C64]) -> (Vec<C64>, Vec<f64>) {
    let dim = 1usize << n;
    let binom = |k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    let mut amps = vec![c(0.0, 0.0); dim];
    let mut m = vec![0.0; dim];
    for (a, (amp, sz)) in amps.iter_mut().zip(m.iter_mut()).enumerate() {
        let ones = a.count_ones() as usize;
        *sz = (n as f64 - 2.0 * ones as f64) / 2.0;
        // m = k - N/2 has N - k ones.
        let k = n - ones;
        *amp = coeffs[k] / binom(ones).sqrt();
    }
    (amps, m)
}

/// `-F(T)/T`, the quantity minimized by the Dicke-coefficient search.
pub fn spin_dephasing_objective(model: &SpinModel, t: f64) -> Result<f64> {
    Ok(-model.qfi(t)? / t)
}

pub fn ghz_coeffs(n: usize) -> Vec<C64> {
    let mut v = vec![c(0.0, 0.0); n + 1];
    v[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[n] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v
}

pub fn uniform_coeffs(n: usize) -> Vec<C64> {
    vec![c(1.0 / ((n + 1) as f64).sqrt(), 0.0); n + 1]
}

/// Number of free parameters in the symmetric parametrization.
pub fn symmetric_param_count(n: usize) -> usize {
    n / 2 + 1
}

/// Maps parameters `p_k`, `k <= N/2`, to normalized coefficients with
/// `c_k = c_{N-k} = |p_k|`.
pub fn symmetric_coeffs(n: usize, params: &[f64]) -> Result<Vec<C64>> {
    if params.len() != symmetric_param_count(n) {
        return Err(Error::DimensionMismatch { expected: symmetric_param_count(n), found: params.len() });
    }
    let mut v: Vec<f64> = (0..=n).map(|k| params[k.min(n - k)].abs()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidState("all coefficients vanish".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v.into_iter().map(|x| c(x, 0.0)).collect())
}

/// Berry-Wiseman coefficients plus one 0.05 step along each coordinate.
pub fn initial_simplex(n: usize) -> Vec<Vec<f64>> {
    let bw = berry_wiseman_state(n);
    let base: Vec<f64> = (0..symmetric_param_count(n)).map(|k| bw[k]).collect();
    let normalize = |mut p: Vec<f64>| {
        let s = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        p.iter_mut().for_each(|x| *x /= s);
        p
    };
    let mut simplex = vec![normalize(base.clone())];
    for k in 0..base.len() {
        let mut p = base.clone();
        p[k] += 0.05;
        simplex.push(normalize(p));
    }
    simplex
}

#[derive(Debug, Clone)]
pub struct DickeOptimum {
    pub coeffs: Vec<C64>,
    /// Best objective `-F/T`.
    pub value: f64,
    pub qfi: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead search over real, nonnegative, flip-symmetric coefficients.
pub fn optimize_dicke<H>(template: &SpinModel, t: f64, config: &NelderMeadConfig, history: H) -> Result<DickeOptimum>
where
    H: FnMut(&IterationRecord),
{
    let n = template.n;
    let mut failure = None;
    let objective = |p: &[f64]| -> f64 {
        let eval = || -> Result<f64> {
            let model = template.with_coeffs(symmetric_coeffs(n, p)?)?;
            spin_dephasing_objective(&model, t)
        };
        match eval() {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = nelder_mead_with_history(objective, initial_simplex(n), config, history);
    if let Some(e) = failure {
        return Err(e);
    }
    let r = result?;
    let coeffs = symmetric_coeffs(n, &r.best_point)?;
    Ok(DickeOptimum {
        coeffs,
        value: r.best_value,
        qfi: -r.best_value * t,
        iterations: r.iterations,
        converged: r.converged,
    })
}
