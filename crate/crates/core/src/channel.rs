// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Channel-level metrology: fidelity between channels, channel QFI from two
//! independent semidefinite programs, gauge-optimized bounds for repeated
//! channel uses, and the test for when an ancilla cannot help.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat};
use crate::qcore::{DensityMatrix, KrausChannel, PureState};
use crate::sdp::{self, embed_any, embed_half, entry_selectors, BlockMatrix, SdpProblem, Sense, SolverSettings};
use crate::stateopt::{coordinate_simplex, nelder_mead, NelderMeadConfig};

/// Relative finite-difference step for the SDP-based channel QFI. The SDPs
/// are solved to a relative gap near 1e-11, so the error
/// `8 * gap / dx^2` stays below 1e-6 only for steps of this size.
pub const CHANNEL_DX: f64 = 1e-2;

pub fn default_channel_dx(x: f64) -> f64 {
    CHANNEL_DX * (1.0 + x.abs())
}

/// Smooth family of channels `x -> {K_j(x)}` with analytic derivatives.
pub trait ParameterizedChannel: Sync {
    fn kraus(&self, x: f64) -> Result<KrausChannel>;
    /// `dK_j/dx`, in the same order as [`ParameterizedChannel::kraus`].
    fn kraus_derivative(&self, x: f64) -> Result<Vec<CMat>>;
}

/// Phase imprinted before a fixed noise channel:
/// `K_j(x) = A_j exp(-i x H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedChannel {
    noise: Vec<CMat>,
    generator: CMat,
}

impl EncodedChannel {
    pub fn new(noise: Vec<CMat>, generator: CMat) -> Result<Self> {
        let ch = KrausChannel::new(noise)?;
        linalg::ensure_hermitian(&generator, 1e-9)?;
        if generator.nrows() != ch.dim_in() {
            return Err(Error::DimensionMismatch { expected: ch.dim_in(), found: generator.nrows() });
        }
        Ok(Self { noise: ch.kraus().to_vec(), generator: linalg::hermitian_part(&generator) })
    }

    pub fn unitary(generator: CMat) -> Result<Self> {
        let d = generator.nrows();
        Self::new(vec![linalg::identity(d)], generator)
    }

    /// `{sqrt(p) exp(-ix sz), sqrt(1-p) sz exp(-ix sz)}`.
    pub fn dephasing(p: f64) -> Result<Self> {
        let ch = crate::qcore::dephasing_channel(p)?;
        Self::new(ch.kraus().to_vec(), linalg::pauli_z())
    }

    /// Amplitude damping with decay probability `g` after a `sigma_z` phase.
    pub fn amplitude_damping(g: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::InvalidArgument(format!("damping probability {g} outside [0,1]")));
        }
        let k0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - g).sqrt(), 0.0)]);
        let k1 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(g.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        Self::new(vec![k0, k1], linalg::pauli_z())
    }

    pub fn noise(&self) -> &[CMat] {
        &self.noise
    }

    pub fn generator(&self) -> &CMat {
        &self.generator
    }
}

impl ParameterizedChannel for EncodedChannel {
    fn kraus(&self, x: f64) -> Result<KrausChannel> {
        let u = linalg::unitary_from_hamiltonian(&self.generator, x);
        KrausChannel::new(self.noise.iter().map(|a| a * &u).collect())
    }

    fn kraus_derivative(&self, x: f64) -> Result<Vec<CMat>> {
        let u = linalg::unitary_from_hamiltonian(&self.generator, x);
        let uh = &u * &self.generator * c(0.0, -1.0);
        Ok(self.noise.iter().map(|a| a * &uh).collect())
    }
}

/// Channel family given by closures.
pub struct FnChannel<K, D> {
    kraus: K,
    derivative: D,
}

impl<K, D> FnChannel<K, D>
where
    K: Fn(f64) -> Vec<CMat> + Sync,
    D: Fn(f64) -> Vec<CMat> + Sync,
{
    pub fn new(kraus: K, derivative: D) -> Self {
        Self { kraus, derivative }
    }
}

impl<K, D> ParameterizedChannel for FnChannel<K, D>
where
    K: Fn(f64) -> Vec<CMat> + Sync,
    D: Fn(f64) -> Vec<CMat> + Sync,
{
    fn kraus(&self, x: f64) -> Result<KrausChannel> {
        KrausChannel::new((self.kraus)(x))
    }

    fn kraus_derivative(&self, x: f64) -> Result<Vec<CMat>> {
        Ok((self.derivative)(x))
    }
}

/// Spot-checks the analytic derivative against a central difference
/// (relative 1e-5) and the differentiated completeness relation.
pub fn check_parameterized<P: ParameterizedChannel + ?Sized>(pc: &P, x: f64) -> Result<()> {
    let k = pc.kraus(x)?;
    let dk = pc.kraus_derivative(x)?;
    if dk.len() != k.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), found: dk.len() });
    }
    let h = 1e-5 * (1.0 + x.abs());
    let kp = pc.kraus(x + h)?;
    let km = pc.kraus(x - h)?;
    let mut scale = 1e-12f64;
    let mut err = 0.0f64;
    let mut completeness = CMat::zeros(k.dim_in(), k.dim_in());
    for (j, dkj) in dk.iter().enumerate() {
        let fd = (&kp.kraus()[j] - &km.kraus()[j]) / c(2.0 * h, 0.0);
        err = err.max(linalg::max_abs(&(&fd - dkj)));
        scale = scale.max(linalg::max_abs(dkj));
        completeness += dkj.adjoint() * &k.kraus()[j] + k.kraus()[j].adjoint() * dkj;
    }
    if err > 1e-5 * scale.max(1.0) {
        return Err(Error::InvalidArgument(format!("Kraus derivative disagrees with finite difference by {err:.3e}")));
    }
    let r = linalg::max_abs(&completeness);
    if r > 1e-8 {
        return Err(Error::Completeness(r));
    }
    Ok(())
}

/// Contraction `W` attaining the channel fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeMatrix {
    w: CMat,
}

impl GaugeMatrix {
    pub fn new(w: CMat) -> Result<Self> {
        let n = linalg::op_norm(&w);
        if n > 1.0 + 1e-6 {
            return Err(Error::InvalidArgument(format!("gauge matrix has operator norm {n}")));
        }
        Ok(Self { w })
    }

    pub fn matrix(&self) -> &CMat {
        &self.w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveInfo {
    pub iterations: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct ChannelFidelity {
    pub value: f64,
    pub gauge: GaugeMatrix,
    pub info: SolveInfo,
}

fn padded_pair(e1: &KrausChannel, e2: &KrausChannel) -> Result<(KrausChannel, KrausChannel)> {
    if e1.dim_in() != e2.dim_in() {
        return Err(Error::DimensionMismatch { expected: e1.dim_in(), found: e2.dim_in() });
    }
    if e1.dim_out() != e2.dim_out() {
        return Err(Error::DimensionMismatch { expected: e1.dim_out(), found: e2.dim_out() });
    }
    let m = e1.len().max(e2.len());
    Ok((e1.padded(m), e2.padded(m)))
}

/// Products `B_ij = K_{1,i}^dagger K_{2,j}`, row-major in `(i, j)`.
fn cross_products(e1: &KrausChannel, e2: &KrausChannel) -> Vec<CMat> {
    let mut out = Vec::with_capacity(e1.len() * e2.len());
    for a in e1.kraus() {
        for b in e2.kraus() {
            out.push(a.adjoint() * b);
        }
    }
    out
}

/// Channel fidelity `max_W lambda_min(K + K^dagger)/2` with
/// `K = sum_ij w_ij K_{1,i}^dagger K_{2,j}` and `||W||_op <= 1`.
pub fn channel_fidelity(e1: &KrausChannel, e2: &KrausChannel) -> Result<ChannelFidelity> {
    let (e1, e2) = padded_pair(e1, e2)?;
    let m = e1.len();
    let d = e1.dim_in();
    let b = cross_products(&e1, &e2);

    let lift = |top: CMat, bottom: CMat| BlockMatrix::from_blocks(vec![embed_any(&top), embed_any(&bottom)]);
    let mut a = Vec::with_capacity(2 * m * m + 1);
    for imag in [false, true] {
        for i in 0..m {
            for j in 0..m {
                let phase = if imag { c(0.0, 1.0) } else { c(1.0, 0.0) };
                let mut top = CMat::zeros(2 * m, 2 * m);
                top[(m + i, j)] = phase;
                top[(j, m + i)] = phase.conj();
                let bij = &b[i * m + j] * phase;
                let bottom = &bij + bij.adjoint();
                // LMI: C + sum_k v_k F_k >= 0, i.e. A_k = -F_k.
                a.push(lift(-top, -bottom));
            }
        }
    }
    a.push(lift(CMat::zeros(2 * m, 2 * m), linalg::identity(d)));
    let mut rhs = vec![0.0; 2 * m * m];
    rhs.push(0.5);
    let cmat = lift(linalg::identity(2 * m), CMat::zeros(d, d));
    let problem = SdpProblem::lmi(cmat, a, rhs);
    let sol = sdp::solve_with(&problem, &SolverSettings::tight())?.require_optimal()?;
    let w = CMat::from_fn(m, m, |i, j| c(sol.y[i * m + j], sol.y[m * m + i * m + j]));
    // Interior-point iterates may overshoot the unit ball by roundoff.
    let norm = linalg::op_norm(&w);
    let w = if norm > 1.0 { w / c(norm, 0.0) } else { w };
    Ok(ChannelFidelity {
        value: sol.dual_value,
        gauge: GaugeMatrix::new(w)?,
        info: SolveInfo { iterations: sol.iterations, gap: sol.gap },
    })
}

pub fn channel_bures_angle(e1: &KrausChannel, e2: &KrausChannel) -> Result<f64> {
    Ok(channel_fidelity(e1, e2)?.value.clamp(0.0, 1.0).acos())
}

fn richardson<F>(dx: f64, mut g: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(dx > 0.0) {
        return Err(Error::InvalidArgument(format!("step {dx} must be positive")));
    }
    let coarse = g(dx)?;
    let fine = g(dx / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Channel QFI `4 Theta^2(E_{x-h/2}, E_{x+h/2}) / h^2`, extrapolated over
/// `h = dx, dx/2`.
pub fn channel_qfi_fd<P: ParameterizedChannel + ?Sized>(pc: &P, x: f64, dx: f64) -> Result<f64> {
    richardson(dx, |h| {
        let theta = channel_bures_angle(&pc.kraus(x - h / 2.0)?, &pc.kraus(x + h / 2.0)?)?;
        Ok(4.0 * theta * theta / (h * h))
    })
}

/// `M_ij = Tr[rho K_i(x1)^dagger K_j(x2)]`.
pub fn metrology_matrix<P: ParameterizedChannel + ?Sized>(
    rho: &DensityMatrix,
    pc: &P,
    x1: f64,
    x2: f64,
) -> Result<CMat> {
    let (e1, e2) = padded_pair(&pc.kraus(x1)?, &pc.kraus(x2)?)?;
    metrology_matrix_of(rho, &e1, &e2)
}

fn metrology_matrix_of(rho: &DensityMatrix, e1: &KrausChannel, e2: &KrausChannel) -> Result<CMat> {
    if rho.dim() != e1.dim_in() {
        return Err(Error::DimensionMismatch { expected: e1.dim_in(), found: rho.dim() });
    }
    let m = e1.len();
    let b = cross_products(e1, e2);
    Ok(CMat::from_fn(m, m, |i, j| (rho.matrix() * &b[i * m + j]).trace()))
}

/// True when all `K_i(x1)^dagger K_j(x2)` commute pairwise to 1e-10.
pub fn ancilla_free_check<P: ParameterizedChannel + ?Sized>(pc: &P, x1: f64, x2: f64) -> Result<bool> {
    let b = cross_products(&pc.kraus(x1)?, &pc.kraus(x2)?);
    Ok(all_commute(&b))
}

fn all_commute(ops: &[CMat]) -> bool {
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            if linalg::max_abs(&linalg::commutator(a, b)) > 1e-10 {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct ProbeSolution {
    /// Minimum over probes of `||M||_tr`.
    pub value: f64,
    pub rho: DensityMatrix,
    pub info: SolveInfo,
}

/// Minimizes `||M(rho)||_tr` over system states with one SDP in the
/// variables `P, Q, rho`.
pub fn optimal_probe_pair(e1: &KrausChannel, e2: &KrausChannel) -> Result<ProbeSolution> {
    let (e1, e2) = padded_pair(e1, e2)?;
    let m = e1.len();
    let d = e1.dim_in();
    let b = cross_products(&e1, &e2);
    let n = 2 * m;
    let mut prob = SdpProblem::new(vec![2 * n, 2 * d], Sense::Min);
    prob.set_objective(BlockMatrix::from_blocks(vec![RMat::identity(2 * n, 2 * n) * 0.25, RMat::zeros(2 * d, 2 * d)]));
    for i in 0..m {
        for j in 0..m {
            let bij = &b[i * m + j];
            let (sel_re, sel_im) = entry_selectors(n, m + i, j);
            // Re Tr(rho B) = Tr(rho (B + B^dagger)/2), Im Tr(rho B) = Tr(rho (B - B^dagger)/(2i)).
            let re_part = (bij + bij.adjoint()) * c(0.5, 0.0);
            let im_part = (bij - bij.adjoint()) * c(0.0, -0.5);
            prob.add_constraint(BlockMatrix::from_blocks(vec![embed_half(&sel_re), -embed_half(&re_part)]), 0.0);
            prob.add_constraint(BlockMatrix::from_blocks(vec![embed_half(&sel_im), -embed_half(&im_part)]), 0.0);
        }
    }
    prob.add_constraint(
        BlockMatrix::from_blocks(vec![RMat::zeros(2 * n, 2 * n), embed_half(&linalg::identity(d))]),
        1.0,
    );
    let sol = sdp::solve_with(&prob, &SolverSettings::tight())?.require_optimal()?;
    let rho = DensityMatrix::project(&sdp::complex_unembed(sol.x.block(1)))?;
    let info = SolveInfo { iterations: sol.iterations, gap: sol.gap };
    let mut out = ProbeSolution { value: sol.primal_value, rho, info };
    if all_commute(&b) {
        if let Some(pure) = purify_on_common_basis(&out.rho, &b) {
            let v = linalg::trace_norm(&metrology_matrix_of(&pure, &e1, &e2)?);
            if v <= out.value + 1e-9 {
                out.rho = pure;
            }
        }
    }
    Ok(out)
}

/// When the `B_ij` are commuting normal operators, `M(rho)` depends only on
/// the diagonal of `rho` in their common eigenbasis; the pure state with
/// the same diagonal is then equally good.
fn purify_on_common_basis(rho: &DensityMatrix, ops: &[CMat]) -> Option<DensityMatrix> {
    let d = rho.dim();
    let mut mix = CMat::zeros(d, d);
    for (k, b) in ops.iter().enumerate() {
        let w1 = 1.0 / (1.0 + k as f64 * 0.754_877_666);
        let w2 = 1.0 / (1.3 + k as f64 * 0.569_840_291);
        mix += (b + b.adjoint()) * c(w1, 0.0) + (b - b.adjoint()) * c(0.0, -w2);
    }
    let v = linalg::eigh(&mix).vectors;
    for b in ops {
        let t = v.adjoint() * b * &v;
        let scale = 1.0 + linalg::max_abs(b);
        for i in 0..d {
            for j in 0..d {
                if i != j && t[(i, j)].norm() > 1e-8 * scale {
                    return None;
                }
            }
        }
    }
    let diag = v.adjoint() * rho.matrix() * &v;
    let amps = DVector::from_fn(d, |i, _| c(diag[(i, i)].re.max(0.0).sqrt(), 0.0));
    let psi = PureState::normalized(&v * amps).ok()?;
    Some(psi.density_matrix())
}

#[derive(Debug, Clone)]
pub struct ProbeOptimum {
    pub rho: DensityMatrix,
    pub qfi: f64,
    pub info: SolveInfo,
}

/// Channel QFI `8(1 - ||M||_tr)/h^2` from the probe SDP at
/// `x -/+ h/2`, extrapolated over `h = dx, dx/2`; returns the optimal probe
/// of the finer solve.
pub fn optimal_probe<P: ParameterizedChannel + ?Sized>(pc: &P, x: f64, dx: f64) -> Result<ProbeOptimum> {
    let mut last = None;
    let qfi = richardson(dx, |h| {
        let s = optimal_probe_pair(&pc.kraus(x - h / 2.0)?, &pc.kraus(x + h / 2.0)?)?;
        let g = 8.0 * (1.0 - s.value) / (h * h);
        last = Some(s);
        Ok(g)
    })?;
    let s = last.expect("richardson evaluates at least once");
    Ok(ProbeOptimum { rho: s.rho, qfi, info: s.info })
}

/// Hermitian basis of `m x m` matrices: diagonal units, then for `i < j`
/// the real and imaginary symmetric pairs.
pub fn hermitian_basis(m: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        let mut e = CMat::zeros(m, m);
        e[(i, i)] = c(1.0, 0.0);
        out.push(e);
    }
    for i in 0..m {
        for j in i + 1..m {
            let mut re = CMat::zeros(m, m);
            re[(i, j)] = c(1.0, 0.0);
            re[(j, i)] = c(1.0, 0.0);
            out.push(re);
            let mut im = CMat::zeros(m, m);
            im[(i, j)] = c(0.0, -1.0);
            im[(j, i)] = c(0.0, 1.0);
            out.push(im);
        }
    }
    out
}

pub fn gauge_from_params(m: usize, params: &[f64]) -> CMat {
    let mut h = CMat::zeros(m, m);
    for (e, &t) in hermitian_basis(m).iter().zip(params) {
        h += e * c(t, 0.0);
    }
    h
}

/// Kraus operators and gauge-rotated derivatives
/// `dK_j - i sum_i h_ji K_i` at `x`.
fn gauged_derivatives<P: ParameterizedChannel + ?Sized>(pc: &P, x: f64, h: &CMat) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let k = pc.kraus(x)?.kraus().to_vec();
    let dk = pc.kraus_derivative(x)?;
    let m = k.len();
    if dk.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: dk.len() });
    }
    if h.shape() != (m, m) {
        return Err(Error::DimensionMismatch { expected: m, found: h.nrows() });
    }
    linalg::ensure_hermitian(h, 1e-9)?;
    let dkt = (0..m)
        .map(|j| {
            let mut d = dk[j].clone();
            for (i, ki) in k.iter().enumerate() {
                d -= ki * (c(0.0, 1.0) * h[(j, i)]);
            }
            d
        })
        .collect();
    Ok((k, dkt))
}

/// `G1 = sum_j dK_j^dagger dK_j` and `G2 = i sum_j dK_j^dagger K_j` for the
/// gauge-rotated Kraus representation.
pub fn g1_g2<P: ParameterizedChannel + ?Sized>(pc: &P, x: f64, gauge: &CMat) -> Result<(CMat, CMat)> {
    let (k, dk) = gauged_derivatives(pc, x, gauge)?;
    let d = k[0].ncols();
    let mut g1 = CMat::zeros(d, d);
    let mut g2 = CMat::zeros(d, d);
    for (kj, dj) in k.iter().zip(&dk) {
        g1 += dj.adjoint() * dj;
        g2 += dj.adjoint() * kj * c(0.0, 1.0);
    }
    let r = linalg::hermiticity_residual(&g2);
    if r > 1e-8 * (1.0 + linalg::max_abs(&g2)) {
        return Err(Error::NotHermitian(r));
    }
    Ok((linalg::hermitian_part(&g1), linalg::hermitian_part(&g2)))
}

/// `4(<G1> - <G2>^2)` for an input state on the system, or on system plus
/// ancilla (system factor first).
pub fn cf_bound<P: ParameterizedChannel + ?Sized>(pc: &P, x: f64, rho: &DensityMatrix, gauge: &CMat) -> Result<f64> {
    let (g1, g2) = g1_g2(pc, x, gauge)?;
    let d = g1.nrows();
    if rho.dim() % d != 0 {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    let anc = rho.dim() / d;
    let lift = |g: &CMat| if anc == 1 { g.clone() } else { linalg::kron(g, &linalg::identity(anc)) };
    let e1 = rho.expectation(&lift(&g1))?;
    let e2 = rho.expectation(&lift(&g2))?;
    Ok(4.0 * (e1 - e2 * e2))
}

#[derive(Debug, Clone)]
pub struct NUseBound {
    pub value: f64,
    pub gauge: CMat,
    pub g1_norm: f64,
    pub g2_norm: f64,
    /// A gauge with `||G2||_op < 1e-6` exists: no Heisenberg scaling.
    pub sql: bool,
    /// The simplex search met its stopping rule within the budget.
    pub certified: bool,
    pub iterations: usize,
}

fn n_use_value(n: f64, g1: f64, g2: f64) -> f64 {
    4.0 * (n * g1 + n * (n - 1.0) * g2 * (g1 + g2 + 1.0))
}

/// Least-squares gauge minimizing `||G2||_F`; `G2` is affine in the gauge,
/// `G2(h) = G2(0) - sum_ij h_ij K_i^dagger K_j`.
fn least_squares_gauge<P: ParameterizedChannel + ?Sized>(pc: &P, x: f64) -> Result<Vec<f64>> {
    let k = pc.kraus(x)?;
    let m = k.len();
    let (_, g2_0) = g1_g2(pc, x, &CMat::zeros(m, m))?;
    let d = g2_0.nrows();
    let basis = hermitian_basis(m);
    let cols: Vec<CMat> = basis
        .iter()
        .map(|e| {
            let mut acc = CMat::zeros(d, d);
            for i in 0..m {
                for j in 0..m {
                    if e[(i, j)] != c(0.0, 0.0) {
                        acc += k.kraus()[i].adjoint() * &k.kraus()[j] * e[(i, j)];
                    }
                }
            }
            acc
        })
        .collect();
    let rows = 2 * d * d;
    let a = RMat::from_fn(rows, cols.len(), |r, col| {
        let z = cols[col].as_slice()[r % (d * d)];
        if r < d * d {
            z.re
        } else {
            z.im
        }
    });
    let t = DVector::from_fn(rows, |r, _| {
        let z = g2_0.as_slice()[r % (d * d)];
        if r < d * d {
            z.re
        } else {
            z.im
        }
    });
    let sol = a.svd(true, true).solve(&t, 1e-12).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(sol.iter().copied().collect())
}

/// Bound `4[N ||G1|| + N(N-1) ||G2|| (||G1|| + ||G2|| + 1)]` on the QFI of
/// `N` parallel uses, minimized over gauges by simplex search with at most
/// `budget` iterations per start.
pub fn n_use_bound<P: ParameterizedChannel + ?Sized>(pc: &P, x: f64, n: usize, budget: usize) -> Result<NUseBound> {
    if n == 0 {
        return Err(Error::InvalidArgument("need N >= 1".into()));
    }
    let m = pc.kraus(x)?.len();
    let nf = n as f64;
    let norms = |p: &[f64]| -> Result<(f64, f64)> {
        let (g1, g2) = g1_g2(pc, x, &gauge_from_params(m, p))?;
        Ok((linalg::op_norm(&g1), linalg::op_norm(&g2)))
    };
    let ls = least_squares_gauge(pc, x)?;
    let sql = norms(&ls)?.1 < 1e-6;

    let config = NelderMeadConfig { epsilon: 1e-12, max_iter: budget, ..Default::default() };
    let mut best: Option<(Vec<f64>, f64, bool, usize)> = None;
    let mut iterations = 0;
    for start in [vec![0.0; m * m], ls] {
        let f = |p: &[f64]| match norms(p) {
            Ok((a, b)) => n_use_value(nf, a, b),
            Err(_) => f64::NAN,
        };
        let r = nelder_mead(f, coordinate_simplex(&start, 0.1), &config)?;
        iterations += r.iterations;
        if best.as_ref().is_none_or(|b| r.best_value < b.1) {
            best = Some((r.best_point, r.best_value, r.converged, r.iterations));
        }
    }
    let (point, value, converged, _) = best.expect("two starts were run");
    let (g1n, g2n) = norms(&point)?;
    Ok(NUseBound {
        value,
        gauge: gauge_from_params(m, &point),
        g1_norm: g1n,
        g2_norm: g2n,
        sql,
        certified: converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli_z;
    use approx::assert_relative_eq;

    #[test]
    fn encoded_channels_are_consistent() {
        for pc in [EncodedChannel::dephasing(0.75).unwrap(), EncodedChannel::amplitude_damping(0.3).unwrap()] {
            check_parameterized(&pc, 0.4).unwrap();
        }
    }

    #[test]
    fn fidelity_of_identical_and_rotated_unitaries() {
        let id = KrausChannel::identity(2);
        let f = channel_fidelity(&id, &id).unwrap();
        assert_relative_eq!(f.value, 1.0, epsilon = 1e-7);
        let delta = std::f64::consts::FRAC_PI_3;
        let rot = KrausChannel::unitary(linalg::unitary_from_hamiltonian(&pauli_z(), delta)).unwrap();
        let f = channel_fidelity(&id, &rot).unwrap();
        assert_relative_eq!(f.value, 0.5, epsilon = 1e-8);
        let g = channel_fidelity(&rot, &id).unwrap();
        assert!((f.value - g.value).abs() < 1e-8);
        // arccos amplifies the residual gap near f = 1 to its square root.
        assert!(channel_bures_angle(&id, &id).unwrap() < 1e-5);
    }

    #[test]
    fn g1_g2_of_unitary_channel() {
        let pc = EncodedChannel::unitary(pauli_z()).unwrap();
        let (g1, g2) = g1_g2(&pc, 0.3, &CMat::zeros(1, 1)).unwrap();
        assert!(linalg::max_abs(&(g1 - linalg::identity(2))) < 1e-12);
        assert!(linalg::max_abs(&(g2 + pauli_z())) < 1e-12);
    }

    #[test]
    fn cf_bound_examples() {
        let pc = EncodedChannel::unitary(pauli_z()).unwrap();
        let z = CMat::zeros(1, 1);
        let plus = PureState::plus().density_matrix();
        assert_relative_eq!(cf_bound(&pc, 0.3, &plus, &z).unwrap(), 4.0, epsilon = 1e-12);
        let zero = PureState::basis(2, 0).density_matrix();
        assert_relative_eq!(cf_bound(&pc, 0.3, &zero, &z).unwrap(), 0.0, epsilon = 1e-12);
        assert!(cf_bound(&pc, 0.3, &DensityMatrix::maximally_mixed(3), &z).is_err());
    }

    #[test]
    fn dephasing_gauge_removes_g2() {
        let p: f64 = 0.75;
        let pc = EncodedChannel::dephasing(p).unwrap();
        let a = -1.0 / (2.0 * (p * (1.0 - p)).sqrt());
        let h = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(a, 0.0), c(a, 0.0), c(0.0, 0.0)]);
        let (_, g2) = g1_g2(&pc, 0.2, &h).unwrap();
        assert!(linalg::max_abs(&g2) < 1e-12);
    }

    #[test]
    fn commuting_structure() {
        assert!(ancilla_free_check(&EncodedChannel::dephasing(0.75).unwrap(), 0.1, 0.2).unwrap());
        assert!(ancilla_free_check(&EncodedChannel::unitary(pauli_z()).unwrap(), 0.1, 0.2).unwrap());
        assert!(!ancilla_free_check(&EncodedChannel::amplitude_damping(0.3).unwrap(), 0.1, 0.2).unwrap());
    }

    #[test]
    fn identity_metrology_matrix() {
        let pc = EncodedChannel::unitary(CMat::zeros(2, 2)).unwrap();
        let rho = DensityMatrix::from_bloch([0.2, 0.1, 0.3]).unwrap();
        let m = metrology_matrix(&rho, &pc, 0.1, 0.4).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert!((m[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }
}
