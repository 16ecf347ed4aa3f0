// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::qcore::{DensityMatrix, PureState};

/// Spectral gaps below this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Eigen-decomposition of a generator with eigenvalues in decreasing order.
#[derive(Debug, Clone)]
pub struct GeneratorSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: CMat,
}

impl GeneratorSpectrum {
    pub fn new(h: &CMat) -> Result<Self> {
        linalg::ensure_hermitian(h, 1e-8)?;
        let eig = linalg::eigh(h);
        let n = eig.values.len();
        let mut vectors = CMat::zeros(n, n);
        for k in 0..n {
            vectors.set_column(k, &eig.vectors.column(n - 1 - k));
        }
        Ok(Self { eigenvalues: eig.values.into_iter().rev().collect(), eigenvectors: vectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Local generator `i U^dagger dU/dx` from a central difference, projected
/// onto Hermitian matrices. For `U = exp(-i x H)` this is `H`.
pub fn generator_hamiltonian<F>(u: F, x: f64, dx: f64) -> Result<CMat>
where
    F: Fn(f64) -> CMat,
{
    if !(dx > 0.0) {
        return Err(Error::InvalidArgument(format!("step {dx} must be positive")));
    }
    let (u0, up, um) = (u(x), u(x + dx), u(x - dx));
    for m in [&u0, &up, &um] {
        linalg::ensure_square(m)?;
        let r = linalg::isometry_residual(m);
        if r > 1e-8 {
            return Err(Error::NotUnitary(r));
        }
    }
    let du = (up - um) / c(2.0 * dx, 0.0);
    Ok(linalg::hermitian_part(&(u0.adjoint() * du * c(0.0, 1.0))))
}

#[derive(Debug, Clone)]
pub struct UnitaryOptimum {
    pub state: PureState,
    /// `(h_max - h_min)^2`, the QFI per unit parameter squared.
    pub qfi_rate: f64,
    pub degenerate: bool,
}

/// Equal superposition of the extreme eigenvectors of the generator.
pub fn optimal_unitary_probe(h: &CMat) -> Result<UnitaryOptimum> {
    let spec = GeneratorSpectrum::new(h)?;
    let d = spec.dim();
    let gap = spec.eigenvalues[0] - spec.eigenvalues[d - 1];
    if gap < DEGENERACY_TOL {
        return Ok(UnitaryOptimum {
            state: PureState::normalized(spec.eigenvectors.column(0).into_owned())?,
            qfi_rate: 0.0,
            degenerate: true,
        });
    }
    let v = (spec.eigenvectors.column(0) + spec.eigenvectors.column(d - 1)) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(UnitaryOptimum { state: PureState::normalized(v)?, qfi_rate: gap * gap, degenerate: false })
}

fn pair_weight(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        (a - b).powi(2) / (a + b)
    } else {
        0.0
    }
}

fn check_spectrum(lambda: &[f64], d: usize) -> Result<()> {
    if lambda.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: lambda.len() });
    }
    if lambda.iter().any(|&l| !(l >= -1e-12)) {
        return Err(Error::InvalidArgument("spectrum has negative entries".into()));
    }
    let s: f64 = lambda.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("spectrum sums to {s}")));
    }
    if lambda.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        return Err(Error::InvalidArgument("spectrum must be sorted in decreasing order".into()));
    }
    Ok(())
}

/// Pairs the i-th and (d-i+1)-th eigenvectors: `(|a> + |b>)/sqrt 2` for the
/// upper half, `(|a> - |b>)/sqrt 2` for the lower half, and the middle
/// vector alone when `d` is odd.
fn paired_state(lambda: &[f64], vectors: &CMat) -> DensityMatrix {
    let d = lambda.len();
    let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut rho = CMat::zeros(d, d);
    for (i, &li) in lambda.iter().enumerate() {
        let j = d - 1 - i;
        let phi: CVec = match (2 * (i + 1)).cmp(&(d + 1)) {
            std::cmp::Ordering::Less => (vectors.column(i) + vectors.column(j)) * s,
            std::cmp::Ordering::Equal => vectors.column(i).into_owned(),
            std::cmp::Ordering::Greater => (vectors.column(i) - vectors.column(j)) * s,
        };
        rho += &phi * phi.adjoint() * c(li, 0.0);
    }
    DensityMatrix::from_propagated(rho)
}

fn paired_fisher(lambda: &[f64], spread: impl Fn(usize, usize) -> f64) -> f64 {
    let d = lambda.len();
    0.5 * (0..d).map(|i| pair_weight(lambda[i], lambda[d - 1 - i]) * spread(i, d - 1 - i).powi(2)).sum::<f64>()
}

/// Optimal mixed probe with fixed spectrum `lambda` (decreasing) for the
/// unitary family generated by `h`, and its QFI.
pub fn ffb_optimal_mixed(lambda: &[f64], h: &CMat) -> Result<(DensityMatrix, f64)> {
    let spec = GeneratorSpectrum::new(h)?;
    check_spectrum(lambda, spec.dim())?;
    let rho = paired_state(lambda, &spec.eigenvectors);
    let f = paired_fisher(lambda, |i, j| spec.eigenvalues[i] - spec.eigenvalues[j]);
    Ok((rho, f))
}

#[derive(Debug, Clone)]
pub struct FfbBound {
    pub value: f64,
    pub initial_state: DensityMatrix,
    /// Set when adjacent eigenvalues of `dH(t)` come within tolerance on the
    /// grid, so the decreasing ordering may not follow smooth branches.
    pub crossing: bool,
}

/// Upper bound on the QFI for a time-dependent Hamiltonian with parameter
/// derivative `dh(t)`, integrated with the trapezoid rule.
pub fn ffb_upper_bound<F>(dh: F, lambda: &[f64], total_time: f64, steps: usize) -> Result<FfbBound>
where
    F: Fn(f64) -> CMat,
{
    if steps == 0 || !(total_time >= 0.0) {
        return Err(Error::InvalidArgument("need steps >= 1 and T >= 0".into()));
    }
    let dt = total_time / steps as f64;
    let spec0 = GeneratorSpectrum::new(&dh(0.0))?;
    let d = spec0.dim();
    check_spectrum(lambda, d)?;
    let mut integral = vec![0.0; d];
    let mut crossing = false;
    for k in 0..=steps {
        let spec = if k == 0 { spec0.clone() } else { GeneratorSpectrum::new(&dh(k as f64 * dt))? };
        if spec.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: spec.dim() });
        }
        let scale = 1.0 + spec.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if spec.eigenvalues.windows(2).any(|w| w[0] - w[1] < 1e-8 * scale) {
            crossing = true;
        }
        let w = if k == 0 || k == steps { 0.5 * dt } else { dt };
        for (acc, mu) in integral.iter_mut().zip(&spec.eigenvalues) {
            *acc += w * mu;
        }
    }
    let value = paired_fisher(lambda, |i, j| integral[i] - integral[j]);
    Ok(FfbBound { value, initial_state: paired_state(lambda, &spec0.eigenvectors), crossing })
}

/// QFI of a Mach-Zehnder interferometer fed with a coherent state of mean
/// photon number `na` and a squeezed vacuum with mean photon number `nb`.
pub fn mzi_coherent_squeezed_qfi(na: f64, nb: f64) -> Result<f64> {
    if !(na >= 0.0 && nb >= 0.0) {
        return Err(Error::InvalidArgument("photon numbers must be nonnegative".into()));
    }
    Ok(2.0 * na * nb + na + nb + 2.0 * na * (nb * (nb + 1.0)).sqrt())
}

/// Coefficients `c_m`, `m = -N/2..N/2`, of the minimum-Holevo-variance
/// input state in the `J_y` eigenbasis.
pub fn berry_wiseman_state(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let norm = (2.0 / (nf + 2.0)).sqrt();
    (0..=n)
        .map(|k| {
            let m = k as f64 - nf / 2.0;
            norm * ((2.0 * m + nf + 2.0) * std::f64::consts::PI / (2.0 * (nf + 2.0))).sin()
        })
        .collect()
}

/// Gibbs mean energy at temperature `t` (Boltzmann constant 1).
pub fn gibbs_mean_energy(energies: &[f64], t: f64) -> f64 {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-(e - e0) / t).exp()).collect();
    let z: f64 = weights.iter().sum();
    energies.iter().zip(&weights).map(|(e, w)| e * w).sum::<f64>() / z
}

/// Deviation from the optimality condition
/// `(E_i - E_j)(E_i + E_j - 2(<H> + T)) = 0` for all level pairs.
pub fn thermometer_residual(energies: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("temperature {t} must be positive")));
    }
    if energies.is_empty() {
        return Ok(0.0);
    }
    let shift = 2.0 * (gibbs_mean_energy(energies, t) + t);
    let mut worst = 0.0f64;
    for (i, ei) in energies.iter().enumerate() {
        for ej in &energies[i + 1..] {
            worst = worst.max(((ei - ej) * (ei + ej - shift)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y, pauli_z};
    use approx::assert_relative_eq;

    #[test]
    fn generator_of_simple_rotation() {
        let u = |x: f64| linalg::unitary_from_hamiltonian(&pauli_z(), x);
        let h = generator_hamiltonian(u, 0.7, 1e-4).unwrap();
        assert!(linalg::max_abs(&(h - pauli_z())) < 1e-6);
        let constant = |_x: f64| linalg::unitary_from_hamiltonian(&pauli_x(), 0.3);
        assert!(linalg::max_abs(&generator_hamiltonian(constant, 0.7, 1e-4).unwrap()) < 1e-10);
        assert!(matches!(generator_hamiltonian(|_| pauli_x() * c(2.0, 0.0), 0.0, 1e-4), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn generator_of_product_rotation() {
        let x = 0.2;
        let u =
            |x: f64| linalg::unitary_from_hamiltonian(&pauli_x(), x) * linalg::unitary_from_hamiltonian(&pauli_z(), x);
        let h = generator_hamiltonian(u, x, 1e-4).unwrap();
        // i U^dagger dU = e^{ix sz} sx e^{-ix sz} + sz
        let expected = pauli_x() * c((2.0 * x).cos(), 0.0) - pauli_y() * c((2.0 * x).sin(), 0.0) + pauli_z();
        assert!(linalg::max_abs(&(h - expected)) < 1e-6);
    }

    #[test]
    fn unitary_optimum_examples() {
        let r = optimal_unitary_probe(&pauli_z()).unwrap();
        assert_relative_eq!(r.qfi_rate, 4.0, epsilon = 1e-12);
        let a = r.state.amplitudes();
        assert_relative_eq!(a[0].norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(a[1].norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert!(optimal_unitary_probe(&linalg::identity(2)).unwrap().degenerate);
        let d = CMat::from_diagonal(&CVec::from_vec(vec![c(3.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
        let r3 = optimal_unitary_probe(&d).unwrap();
        assert_relative_eq!(r3.qfi_rate, 9.0, epsilon = 1e-12);
        assert!(r3.state.amplitudes()[1].norm() < 1e-12);
    }

    #[test]
    fn ffb_examples() {
        let (rho, f) = ffb_optimal_mixed(&[0.8, 0.2], &pauli_z()).unwrap();
        assert_relative_eq!(f, 1.44, epsilon = 1e-12);
        assert!((rho.purity() - (0.64 + 0.04)).abs() < 1e-12);
        let (_, f0) = ffb_optimal_mixed(&[0.5, 0.5], &pauli_z()).unwrap();
        assert_eq!(f0, 0.0);
        let (_, fp) = ffb_optimal_mixed(&[1.0, 0.0], &pauli_z()).unwrap();
        assert_relative_eq!(fp, 4.0, epsilon = 1e-12);
        assert!(ffb_optimal_mixed(&[0.2, 0.8], &pauli_z()).is_err());
        assert!(ffb_optimal_mixed(&[0.5, 0.6], &pauli_z()).is_err());
    }

    #[test]
    fn ffb_bound_examples() {
        let b =
            ffb_upper_bound(|t| pauli_z() * c(t.cos(), 0.0), &[1.0, 0.0], std::f64::consts::FRAC_PI_2, 2000).unwrap();
        assert!((b.value - 4.0).abs() < 1e-5);
        let b = ffb_upper_bound(|_| pauli_z(), &[1.0, 0.0], 1.5, 10).unwrap();
        assert_relative_eq!(b.value, 1.5f64.powi(2) * 4.0, epsilon = 1e-12);
        let b = ffb_upper_bound(|_| pauli_z(), &[0.5, 0.5], 1.5, 10).unwrap();
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn mzi_closed_form() {
        assert_relative_eq!(mzi_coherent_squeezed_qfi(4.0, 1.0).unwrap(), 13.0 + 8.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(mzi_coherent_squeezed_qfi(7.0, 0.0).unwrap(), 7.0);
        assert_eq!(mzi_coherent_squeezed_qfi(0.0, 3.0).unwrap(), 3.0);
        assert!(mzi_coherent_squeezed_qfi(-1.0, 0.0).is_err());
    }

    #[test]
    fn berry_wiseman_coefficients() {
        let c2 = berry_wiseman_state(2);
        assert_relative_eq!(c2[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(c2[1], std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_relative_eq!(c2[2], 0.5, epsilon = 1e-14);
        for n in 1..=40 {
            let v = berry_wiseman_state(n);
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            for k in 0..=n {
                assert!((v[k] - v[n - k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thermometer_examples() {
        assert_eq!(thermometer_residual(&[1.0, 1.0, 1.0], 0.7).unwrap(), 0.0);
        assert!(thermometer_residual(&[0.0, 1.0, 3.0], 0.7).unwrap() > 1e-3);
        assert!(thermometer_residual(&[0.0, 1.0], 0.0).is_err());
    }
}
