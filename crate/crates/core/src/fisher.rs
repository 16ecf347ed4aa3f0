// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Classical and quantum Fisher information, the symmetric logarithmic
//! derivative, fidelity and Bures geometry.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat};
use crate::qcore::{DensityMatrix, STATE_TOL};

/// Probabilities at or below this value are treated as zero.
pub const PROB_CUTOFF: f64 = 1e-12;
/// Relative cutoff on `lambda_a + lambda_b` defining the support of `rho`.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Tolerance on derivative matrix elements outside the support.
pub const SUPPORT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    probs: Vec<f64>,
    derivs: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(probs: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if probs.len() != derivs.len() {
            return Err(Error::DimensionMismatch { expected: probs.len(), found: derivs.len() });
        }
        if probs.iter().chain(&derivs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(p) = probs.iter().find(|&&p| p < -STATE_TOL) {
            return Err(Error::InvalidArgument(format!("negative probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        let dtotal: f64 = derivs.iter().sum();
        if dtotal.abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("derivatives sum to {dtotal}")));
        }
        Ok(Self { probs, derivs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }
}

/// Classical Fisher information `sum_i (dp_i)^2 / p_i`.
pub fn cfi(dist: &ProbabilityDistribution) -> Result<f64> {
    let mut total = 0.0;
    for (index, (&p, &d)) in dist.probs.iter().zip(&dist.derivs).enumerate() {
        if p > PROB_CUTOFF {
            total += d * d / p;
        } else if d.abs() > PROB_CUTOFF {
            return Err(Error::SingularFisher { index, prob: p, deriv: d });
        }
    }
    Ok(total)
}

/// Positive operator-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMat>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidArgument("POVM needs at least one element".into()));
        };
        let d = linalg::ensure_square(first)?;
        let mut sum = CMat::zeros(d, d);
        for e in &elements {
            if e.shape() != (d, d) {
                return Err(Error::DimensionMismatch { expected: d, found: e.nrows() });
            }
            linalg::ensure_hermitian(e, STATE_TOL)?;
            let min = linalg::eigh(e).values[0];
            if min < -STATE_TOL {
                return Err(Error::NotPsd(min));
            }
            sum += e;
        }
        let r = linalg::max_abs(&(sum - linalg::identity(d)));
        if r > STATE_TOL {
            return Err(Error::Completeness(r));
        }
        Ok(Self { elements })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &CMat) -> Result<Self> {
        let elements = (0..basis.ncols())
            .map(|k| {
                let v = basis.column(k);
                v * v.adjoint()
            })
            .collect();
        Self::new(elements)
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }
}

#[derive(Debug, Clone)]
pub struct SldResult {
    pub sld: CMat,
    pub qfi: f64,
    /// Absolute threshold on `lambda_a + lambda_b` used for the support.
    pub support_cutoff: f64,
}

fn check_derivative(rho: &DensityMatrix, drho: &CMat) -> Result<()> {
    if drho.shape() != (rho.dim(), rho.dim()) {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: drho.nrows() });
    }
    linalg::ensure_hermitian(drho, 1e-8)?;
    let tr = drho.trace();
    if tr.norm() > 1e-8 {
        return Err(Error::InvalidArgument(format!("derivative has trace {tr}")));
    }
    Ok(())
}

/// Solves `d rho = (rho L + L rho)/2` in the eigenbasis of `rho`.
pub fn sld(rho: &DensityMatrix, drho: &CMat) -> Result<SldResult> {
    check_derivative(rho, drho)?;
    let eig = linalg::eigh(rho.matrix());
    let d = rho.dim();
    let lam: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let top = lam.iter().copied().fold(0.0, f64::max);
    let cutoff = SUPPORT_CUTOFF * top;
    let v = &eig.vectors;
    let dr = v.adjoint() * linalg::hermitian_part(drho) * v;
    let scale = 1.0 + linalg::max_abs(&dr);
    let mut l = CMat::zeros(d, d);
    let mut qfi = 0.0;
    for a in 0..d {
        for b in 0..d {
            let s = lam[a] + lam[b];
            if s > cutoff {
                l[(a, b)] = dr[(a, b)] * c(2.0 / s, 0.0);
                qfi += 2.0 * dr[(a, b)].norm_sqr() / s;
            } else if dr[(a, b)].norm() > SUPPORT_TOL * scale {
                return Err(Error::IllPosedSld(dr[(a, b)].norm()));
            }
        }
    }
    let sld = linalg::hermitian_part(&(v * l * v.adjoint()));
    Ok(SldResult { sld, qfi, support_cutoff: cutoff })
}

/// Quantum Fisher information matrix `F_jk = Tr(rho {L_j, L_k})/2`.
pub fn qfim(rho: &DensityMatrix, drhos: &[CMat]) -> Result<RMat> {
    let slds = drhos.iter().map(|d| sld(rho, d)).collect::<Result<Vec<_>>>()?;
    let n = slds.len();
    let mut f = RMat::zeros(n, n);
    for j in 0..n {
        f[(j, j)] = slds[j].qfi;
        for k in 0..j {
            let v = (rho.matrix() * linalg::anticommutator(&slds[j].sld, &slds[k].sld)).trace().re * 0.5;
            f[(j, k)] = v;
            f[(k, j)] = v;
        }
    }
    Ok(f)
}

/// Classical Fisher information of the outcome distribution of `povm`.
pub fn cfi_povm(rho: &DensityMatrix, drho: &CMat, povm: &Povm) -> Result<f64> {
    check_derivative(rho, drho)?;
    if povm.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: povm.dim() });
    }
    let probs: Vec<f64> = povm.elements.iter().map(|e| (rho.matrix() * e).trace().re).collect();
    let derivs: Vec<f64> = povm.elements.iter().map(|e| (drho * e).trace().re).collect();
    cfi(&ProbabilityDistribution::new(probs, derivs)?)
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`, evaluated as the
/// trace norm of `sqrt(rho1) sqrt(rho2)`.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch { expected: rho1.dim(), found: rho2.dim() });
    }
    let s1 = linalg::psd_sqrt(rho1.matrix());
    let s2 = linalg::psd_sqrt(rho2.matrix());
    Ok(linalg::trace_norm(&(s1 * s2)))
}

pub fn bures_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    Ok((2.0 - 2.0 * fidelity(rho1, rho2)?).max(0.0).sqrt())
}

pub fn bures_angle(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    Ok(fidelity(rho1, rho2)?.clamp(0.0, 1.0).acos())
}

/// Relative eigenvalue threshold for the rank check in [`qfi_from_bures`].
const RANK_CUTOFF: f64 = 1e-10;

/// QFI from the Bures distance between neighbouring states,
/// `4 D^2(rho_x, rho_{x+dx}) / dx^2`, with one Richardson extrapolation
/// over the steps `dx` and `dx/2`.
pub fn qfi_from_bures<F>(family: F, x: f64, dx: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    if !(dx > 0.0) {
        return Err(Error::InvalidArgument(format!("step {dx} must be positive")));
    }
    let rho = family(x)?;
    let rank = rho.rank(RANK_CUTOFF);
    let susceptibility = |h: f64| -> Result<f64> {
        let other = family(x + h)?;
        let r = other.rank(RANK_CUTOFF);
        if r != rank {
            return Err(Error::RankChange(rank, r));
        }
        Ok(8.0 * (1.0 - fidelity(&rho, &other)?) / (h * h))
    };
    let coarse = susceptibility(dx)?;
    let fine = susceptibility(dx / 2.0)?;
    Ok((2.0 * fine - coarse).max(0.0))
}

/// Central-difference derivative of a matrix-valued function with one
/// Richardson step; the base step is `1e-4 (1 + |x|)`.
pub fn central_derivative<F>(f: F, x: f64) -> Result<CMat>
where
    F: Fn(f64) -> Result<CMat>,
{
    let h = 1e-4 * (1.0 + x.abs());
    let d = |h: f64| -> Result<CMat> { Ok((f(x + h)? - f(x - h)?) / c(2.0 * h, 0.0)) };
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok((fine * c(4.0, 0.0) - coarse) / c(3.0, 0.0))
}
