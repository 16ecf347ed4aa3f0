// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error-corrected sensing under Markovian noise: the span of the Lindblad
//! operators, the split of the Hamiltonian into its in-span and orthogonal
//! parts, code construction with an ancilla, code verification, and
//! optimization of the code-space gap by semidefinite programming.

use serde::{Deserialize, Serialize};

use crate::channel::hermitian_basis;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, RMat, C64};
use crate::qcore::{partial_trace, DensityMatrix, STATE_TOL};
use crate::sdp::{self, complex_embed, embed_half, BlockMatrix, SdpProblem, Sense, SolverSettings};

/// Residual norm below which a candidate direction is already in the span.
pub const SPAN_TOL: f64 = 1e-10;
/// `H_perp` norm above which the Hamiltonian is outside the span.
pub const HNLS_TOL: f64 = 1e-9;
/// Tolerance of the three code conditions.
pub const CODE_TOL: f64 = 1e-9;

fn herm_inner(a: &CMat, b: &CMat) -> f64 {
    linalg::inner_re(a, b)
}

/// Orthonormal Hermitian basis, under `Tr(AB)`, of
/// `span{I, G_j, G_j^dagger, G_j^dagger G_l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpan {
    dim: usize,
    basis: Vec<CMat>,
}

impl LindbladSpan {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Orthogonal projection of a Hermitian matrix onto the span.
    pub fn project(&self, h: &CMat) -> CMat {
        let mut p = CMat::zeros(self.dim, self.dim);
        for e in &self.basis {
            p += e * c(herm_inner(e, h), 0.0);
        }
        p
    }

    /// Hermitian orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Vec<CMat> {
        let mut out = self.basis.clone();
        let start = out.len();
        for cand in hermitian_basis(self.dim) {
            push_orthogonal(&mut out, cand);
        }
        out.split_off(start)
    }
}

fn push_orthogonal(basis: &mut Vec<CMat>, cand: CMat) {
    let scale = 1.0 + linalg::frobenius(&cand);
    let mut v = cand;
    // Two passes of classical Gram-Schmidt keep the basis orthonormal to
    // rounding error.
    for _ in 0..2 {
        for e in basis.iter() {
            let p = herm_inner(e, &v);
            v -= e * c(p, 0.0);
        }
    }
    let n = linalg::frobenius(&v);
    if n >= SPAN_TOL * scale {
        basis.push(linalg::hermitian_part(&(v / c(n, 0.0))));
    }
}

pub fn lindblad_span(dim: usize, ops: &[CMat]) -> Result<LindbladSpan> {
    if dim == 0 {
        return Err(Error::InvalidArgument("span dimension must be positive".into()));
    }
    for g in ops {
        if g.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: g.nrows() });
        }
    }
    let mut candidates = vec![linalg::identity(dim)];
    candidates.extend(ops.iter().cloned());
    for a in ops {
        for b in ops {
            candidates.push(a.adjoint() * b);
        }
    }
    let mut basis = Vec::new();
    for m in candidates {
        let herm = linalg::hermitian_part(&m);
        let anti = (&m - m.adjoint()) * c(0.0, -0.5);
        push_orthogonal(&mut basis, herm);
        push_orthogonal(&mut basis, anti);
    }
    Ok(LindbladSpan { dim, basis })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HnlsReport {
    pub h_par: CMat,
    pub h_perp: CMat,
    /// Frobenius norm of `h_perp`.
    pub perp_norm: f64,
    /// Whether the Hamiltonian lies outside the span.
    pub hnls: bool,
}

pub fn hnls_decompose(h: &CMat, span: &LindbladSpan) -> Result<HnlsReport> {
    if h.shape() != (span.dim, span.dim) {
        return Err(Error::DimensionMismatch { expected: span.dim, found: h.nrows() });
    }
    linalg::ensure_hermitian(h, STATE_TOL)?;
    let h = linalg::hermitian_part(h);
    let h_par = span.project(&h);
    let h_perp = &h - &h_par;
    let perp_norm = linalg::frobenius(&h_perp);
    Ok(HnlsReport { h_par, h_perp, perp_norm, hnls: perp_norm > HNLS_TOL })
}

/// Two-dimensional code on system x ancilla spanned by `c0`, `c1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodePair {
    pub c0: CVec,
    pub c1: CVec,
    pub system_dim: usize,
    pub ancilla_dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorJson {
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodePairJson {
    system_dim: usize,
    ancilla_dim: usize,
    c0: VectorJson,
    c1: VectorJson,
}

fn vector_to_json(v: &CVec) -> VectorJson {
    VectorJson { re: v.iter().map(|z| z.re).collect(), im: v.iter().map(|z| z.im).collect() }
}

fn vector_from_json(v: VectorJson) -> Result<CVec> {
    if v.re.len() != v.im.len() {
        return Err(Error::DimensionMismatch { expected: v.re.len(), found: v.im.len() });
    }
    if v.re.iter().chain(&v.im).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(CVec::from_iterator(v.re.len(), v.re.iter().zip(&v.im).map(|(&a, &b)| c(a, b))))
}

impl CodePair {
    pub fn new(c0: CVec, c1: CVec, system_dim: usize, ancilla_dim: usize) -> Result<Self> {
        let n = system_dim
            .checked_mul(ancilla_dim)
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("invalid factor dims {system_dim} x {ancilla_dim}")))?;
        for v in [&c0, &c1] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
        let code = Self { c0, c1, system_dim, ancilla_dim };
        let gram = [code.c0.norm() - 1.0, code.c1.norm() - 1.0, code.c0.dotc(&code.c1).norm()];
        if gram.iter().any(|g| !(g.abs() <= STATE_TOL)) {
            return Err(Error::InvalidState(format!("code words are not orthonormal: {gram:?}")));
        }
        let overlap = code.ancilla_overlap()?;
        if !(overlap <= STATE_TOL) {
            return Err(Error::InvalidState(format!("ancilla supports overlap by {overlap:e}")));
        }
        Ok(code)
    }

    /// `Tr(sigma_0 sigma_1)` of the two reduced ancilla states.
    pub fn ancilla_overlap(&self) -> Result<f64> {
        let dims = [self.system_dim, self.ancilla_dim];
        let a0 = partial_trace(&DensityMatrix::from_propagated(&self.c0 * self.c0.adjoint()), &dims, 0)?;
        let a1 = partial_trace(&DensityMatrix::from_propagated(&self.c1 * self.c1.adjoint()), &dims, 0)?;
        Ok(linalg::trace(&(a0.matrix() * a1.matrix())).re.abs())
    }

    pub fn total_dim(&self) -> usize {
        self.system_dim * self.ancilla_dim
    }

    /// Projector onto the code space.
    pub fn projector(&self) -> CMat {
        &self.c0 * self.c0.adjoint() + &self.c1 * self.c1.adjoint()
    }

    /// `A kron I_ancilla`.
    pub fn lift(&self, a: &CMat) -> Result<CMat> {
        if a.shape() != (self.system_dim, self.system_dim) {
            return Err(Error::DimensionMismatch { expected: self.system_dim, found: a.nrows() });
        }
        Ok(linalg::kron(a, &linalg::identity(self.ancilla_dim)))
    }

    /// `<C_i| A kron I |C_j>` as a 2x2 matrix.
    pub fn restrict(&self, a: &CMat) -> Result<CMat> {
        let la = self.lift(a)?;
        let words = [&self.c0, &self.c1];
        Ok(CMat::from_fn(2, 2, |i, j| words[i].dotc(&(&la * words[j]))))
    }

    pub fn to_json(&self) -> String {
        let j = CodePairJson {
            system_dim: self.system_dim,
            ancilla_dim: self.ancilla_dim,
            c0: vector_to_json(&self.c0),
            c1: vector_to_json(&self.c1),
        };
        serde_json::to_string_pretty(&j).expect("code pair serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: CodePairJson = serde_json::from_str(text)?;
        Self::new(vector_from_json(j.c0)?, vector_from_json(j.c1)?, j.system_dim, j.ancilla_dim)
    }
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
fn fix_phase(v: CVec) -> CVec {
    let (k, _) = v.iter().enumerate().fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
    let ph = v[k] / c(v[k].norm(), 0.0);
    v / ph
}

/// Code from the sign split `H_perp = ||H_perp||_1 (rho_0 - rho_1) / 2`,
/// purifying `rho_0` into ancilla levels `0..r0` and `rho_1` into
/// `r0..r0+r1` so that the two ancilla supports are orthogonal.
pub fn build_code(h_perp: &CMat) -> Result<CodePair> {
    let d = linalg::ensure_square(h_perp)?;
    linalg::ensure_hermitian(h_perp, STATE_TOL)?;
    let eig = linalg::eigh(&linalg::hermitian_part(h_perp));
    let top = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(top > HNLS_TOL) {
        return Err(Error::InvalidArgument("cannot build a code from a zero Hamiltonian component".into()));
    }
    let cut = SPAN_TOL * top;
    let pos: Vec<usize> = (0..d).filter(|&i| eig.values[i] > cut).rev().collect();
    let neg: Vec<usize> = (0..d).filter(|&i| eig.values[i] < -cut).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InvalidArgument("component must have both signs; it is not traceless".into()));
    }
    let ancilla_dim = pos.len() + neg.len();
    let purify = |idx: &[usize], offset: usize| -> CVec {
        let total: f64 = idx.iter().map(|&i| eig.values[i].abs()).sum();
        let mut v = CVec::zeros(d * ancilla_dim);
        for (a, &i) in idx.iter().enumerate() {
            let w = (eig.values[i].abs() / total).sqrt();
            let u = fix_phase(eig.vectors.column(i).into_owned());
            for s in 0..d {
                v[s * ancilla_dim + offset + a] = u[s] * c(w, 0.0);
            }
        }
        v
    };
    let c0 = purify(&pos, 0);
    let c1 = purify(&neg, pos.len());
    CodePair::new(c0, c1, d, ancilla_dim)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeReport {
    /// `P G_j P = lambda_j P`.
    pub lambda: Vec<C64>,
    /// `P G_j^dagger G_l P = mu_jl P`.
    pub mu: CMat,
    /// `P G P` on system x ancilla.
    pub g_eff: CMat,
    pub condition1: bool,
    pub condition2: bool,
    /// `P G P` is not proportional to `P`.
    pub condition3: bool,
    pub residual1: f64,
    pub residual2: f64,
    /// Distance of `P G P` from `kappa P`.
    pub residual3: f64,
    /// Spread of the eigenvalues of `G` restricted to the code.
    pub gap: f64,
}

impl CodeReport {
    pub fn passes(&self) -> bool {
        self.condition1 && self.condition2 && self.condition3
    }
}

pub fn verify_code(code: &CodePair, ops: &[CMat], generator: &CMat) -> Result<CodeReport> {
    let p = code.projector();
    let scalar_part = |a: &CMat| -> Result<(C64, f64)> {
        let pap = &p * code.lift(a)? * &p;
        let s = linalg::trace(&pap) / c(2.0, 0.0);
        Ok((s, linalg::max_abs(&(pap - &p * s))))
    };
    let mut lambda = Vec::with_capacity(ops.len());
    let mut residual1: f64 = 0.0;
    for g in ops {
        let (l, r) = scalar_part(g)?;
        lambda.push(l);
        residual1 = residual1.max(r);
    }
    let m = ops.len();
    let mut mu = CMat::zeros(m, m);
    let mut residual2: f64 = 0.0;
    for j in 0..m {
        for l in 0..m {
            let (v, r) = scalar_part(&(ops[j].adjoint() * &ops[l]))?;
            mu[(j, l)] = v;
            residual2 = residual2.max(r);
        }
    }
    linalg::ensure_hermitian(generator, STATE_TOL)?;
    let (_, residual3) = scalar_part(generator)?;
    let g_eff = &p * code.lift(generator)? * &p;
    let block = linalg::hermitian_part(&code.restrict(generator)?);
    let ev = linalg::eigh(&block).values;
    Ok(CodeReport {
        lambda,
        mu,
        g_eff,
        condition1: residual1 <= CODE_TOL,
        condition2: residual2 <= CODE_TOL,
        condition3: residual3 > CODE_TOL,
        residual1,
        residual2,
        residual3,
        gap: ev[1] - ev[0],
    })
}

/// `t^2 gap^2`, the QFI of the error-corrected evolution for the balanced
/// superposition of the extreme code-space eigenstates.
pub fn effective_qfi(gap: f64, t: f64) -> Result<f64> {
    if !(gap >= 0.0 && gap.is_finite() && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("gap {gap} must be finite and nonnegative")));
    }
    Ok(t * t * gap * gap)
}

/// Norm bounding `C~ = rho_0 - rho_1` in the code-gap primal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalNorm {
    /// `||C~||_1 <= 2`, the bound satisfied by any difference of two
    /// density matrices.
    #[default]
    Trace,
    /// `||C~||_op <= 2`.
    Operator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeGap {
    /// `max Tr(C~ H_perp)` over `C~` orthogonal to the span.
    pub primal_value: f64,
    /// `min_nu ||H_perp + sum_k nu_k E_k||_op`.
    pub dual_value: f64,
    pub c_tilde: CMat,
    /// `Tr(C~ H_perp)` evaluated on the returned `C~`.
    pub achieved_gap: f64,
    pub nu: Vec<f64>,
}

fn hermitian_block(a: &CMat, b: &CMat, c_: &CMat, d: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c_);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// `min s s.t. [[s I, H1], [H1, s I]] >= 0` with `H1 = H_perp + sum nu_k E_k`.
fn gap_dual(h: &CMat, span: &LindbladSpan, settings: &SolverSettings) -> Result<(f64, Vec<f64>)> {
    let d = span.dim;
    let z = CMat::zeros(d, d);
    let id = linalg::identity(d);
    let cmat = BlockMatrix::from_blocks(vec![complex_embed(&hermitian_block(&z, h, h, &z))?]);
    let mut a = vec![BlockMatrix::from_blocks(vec![complex_embed(&hermitian_block(&id, &z, &z, &id))? * -1.0])];
    for e in span.basis() {
        a.push(BlockMatrix::from_blocks(vec![complex_embed(&hermitian_block(&z, e, e, &z))? * -1.0]));
    }
    let mut b = vec![0.0; a.len()];
    b[0] = -1.0;
    let sol = sdp::solve_with(&SdpProblem::lmi(cmat, a, b), settings)?.require_optimal()?;
    Ok((-sol.dual_value, sol.y[1..].to_vec()))
}

/// Trace-norm primal with `C~ = P - N`, `Tr P + Tr N + t = 2`.
fn gap_primal_trace(h: &CMat, span: &LindbladSpan, settings: &SolverSettings) -> Result<CMat> {
    let d = span.dim;
    let mut prob = SdpProblem::new(vec![2 * d, 2 * d, 1], Sense::Max);
    let eh = embed_half(h);
    prob.set_objective(BlockMatrix::from_blocks(vec![eh.clone(), -eh, RMat::zeros(1, 1)]));
    for e in span.basis() {
        let ee = embed_half(e);
        prob.add_constraint(BlockMatrix::from_blocks(vec![ee.clone(), -ee, RMat::zeros(1, 1)]), 0.0);
    }
    let ei = embed_half(&linalg::identity(d));
    prob.add_constraint(BlockMatrix::from_blocks(vec![ei.clone(), ei, RMat::from_element(1, 1, 1.0)]), 2.0);
    let sol = sdp::solve_with(&prob, settings)?.require_optimal()?;
    let p = sdp::complex_unembed(sol.x.block(0));
    let n = sdp::complex_unembed(sol.x.block(1));
    Ok(p - n)
}

/// Operator-norm primal over `C~ = sum_i y_i F_i` in the orthogonal
/// complement of the span, `-2 I <= C~ <= 2 I`.
fn gap_primal_operator(h: &CMat, span: &LindbladSpan, settings: &SolverSettings) -> Result<CMat> {
    let d = span.dim;
    let comp = span.complement();
    if comp.is_empty() {
        return Ok(CMat::zeros(d, d));
    }
    let two = complex_embed(&(linalg::identity(d) * c(2.0, 0.0)))?;
    let cmat = BlockMatrix::from_blocks(vec![two.clone(), two]);
    let mut a = Vec::with_capacity(comp.len());
    let mut b = Vec::with_capacity(comp.len());
    for f in &comp {
        let ef = complex_embed(f)?;
        a.push(BlockMatrix::from_blocks(vec![ef.clone(), -ef]));
        b.push(herm_inner(f, h));
    }
    let sol = sdp::solve_with(&SdpProblem::lmi(cmat, a, b), settings)?.require_optimal()?;
    let mut ct = CMat::zeros(d, d);
    for (f, &y) in comp.iter().zip(&sol.y) {
        ct += f * c(y, 0.0);
    }
    Ok(ct)
}

/// Optimal code-space gap for the orthogonal Hamiltonian component.
pub fn optimize_code_gap(h_perp: &CMat, span: &LindbladSpan, norm: PrimalNorm) -> Result<CodeGap> {
    if h_perp.shape() != (span.dim, span.dim) {
        return Err(Error::DimensionMismatch { expected: span.dim, found: h_perp.nrows() });
    }
    linalg::ensure_hermitian(h_perp, STATE_TOL)?;
    let h = linalg::hermitian_part(h_perp);
    let settings = SolverSettings::tight();
    let (dual_value, nu) = gap_dual(&h, span, &settings)?;
    let c_tilde = match norm {
        PrimalNorm::Trace => gap_primal_trace(&h, span, &settings)?,
        PrimalNorm::Operator => gap_primal_operator(&h, span, &settings)?,
    };
    let c_tilde = linalg::hermitian_part(&c_tilde);
    let achieved_gap = herm_inner(&c_tilde, &h);
    Ok(CodeGap { primal_value: achieved_gap, dual_value, c_tilde, achieved_gap, nu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y, pauli_z};

    fn in_span(span: &LindbladSpan, h: &CMat) -> bool {
        linalg::frobenius(&(h - span.project(h))) < 1e-10
    }

    #[test]
    fn span_examples() {
        let sz = lindblad_span(2, &[pauli_z()]).unwrap();
        assert_eq!(sz.len(), 2);
        assert!(in_span(&sz, &pauli_z()) && in_span(&sz, &linalg::identity(2)));
        let sx = lindblad_span(2, &[pauli_x()]).unwrap();
        assert_eq!(sx.len(), 2);
        assert!(in_span(&sx, &pauli_x()));
        let empty = lindblad_span(3, &[]).unwrap();
        assert_eq!(empty.len(), 1);
        let e = &empty.basis()[0];
        assert!((linalg::trace(&(e * e)).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn span_is_orthonormal_for_non_hermitian_ops() {
        let lower = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let s = lindblad_span(2, &[lower]).unwrap();
        assert_eq!(s.len(), 4);
        for (i, a) in s.basis().iter().enumerate() {
            assert!(linalg::is_hermitian(a, 1e-15));
            for (j, b) in s.basis().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((linalg::trace(&(a * b)).re - want).abs() < 1e-12);
            }
        }
        assert!(s.complement().is_empty());
    }

    #[test]
    fn hnls_examples() {
        let r = hnls_decompose(&pauli_z(), &lindblad_span(2, &[pauli_z()]).unwrap()).unwrap();
        assert!(!r.hnls && r.perp_norm < 1e-12);
        let span_x = lindblad_span(2, &[pauli_x()]).unwrap();
        let r = hnls_decompose(&pauli_z(), &span_x).unwrap();
        assert!(r.hnls);
        assert!(linalg::max_abs(&(&r.h_perp - pauli_z())) < 1e-12);
        assert!(!hnls_decompose(&linalg::identity(2), &span_x).unwrap().hnls);
    }

    #[test]
    fn sigma_z_code() {
        let code = build_code(&pauli_z()).unwrap();
        assert_eq!(code.ancilla_dim, 2);
        let mut want0 = CVec::zeros(4);
        want0[0] = c(1.0, 0.0);
        let mut want1 = CVec::zeros(4);
        want1[3] = c(1.0, 0.0);
        assert!((&code.c0 - want0).norm() < 1e-12);
        assert!((&code.c1 - want1).norm() < 1e-12);
        let rep = verify_code(&code, &[pauli_x()], &pauli_z()).unwrap();
        assert!(rep.passes(), "{rep:?}");
        assert!((rep.gap - 2.0).abs() < 1e-12);
        assert!((effective_qfi(rep.gap, 1.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_component_ranks() {
        let h = CMat::from_diagonal(&CVec::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0), c(-3.0, 0.0)])) / c(6.0, 0.0);
        let code = build_code(&h).unwrap();
        assert_eq!(code.ancilla_dim, 3);
        assert!((code.c0.norm() - 1.0).abs() < 1e-12);
        assert!(code.c0.dotc(&code.c1).norm() < 1e-12);
        assert!(code.ancilla_overlap().unwrap() < 1e-12);
        let a0 = partial_trace(&DensityMatrix::from_propagated(&code.c0 * code.c0.adjoint()), &[3, 3], 1).unwrap();
        assert_eq!(a0.rank(1e-10), 2);
    }

    #[test]
    fn degenerate_code_fails_condition_three() {
        let code = build_code(&pauli_z()).unwrap();
        let rep = verify_code(&code, &[pauli_x()], &linalg::identity(2)).unwrap();
        assert!(rep.condition1 && rep.condition2 && !rep.condition3);
        assert!(build_code(&CMat::zeros(2, 2)).is_err());
    }

    #[test]
    fn mu_is_hermitian() {
        let code = build_code(&pauli_z()).unwrap();
        let ops = [pauli_x(), pauli_y() * c(0.3, 0.0) + pauli_x()];
        let rep = verify_code(&code, &ops, &pauli_z()).unwrap();
        assert!(linalg::max_abs(&(&rep.mu - rep.mu.adjoint())) < 1e-10);
    }

    #[test]
    fn worked_gap_example() {
        let span = lindblad_span(2, &[pauli_x()]).unwrap();
        let g = optimize_code_gap(&pauli_z(), &span, PrimalNorm::Trace).unwrap();
        assert!((g.dual_value - 1.0).abs() < 1e-7, "{g:?}");
        assert!((g.primal_value - 2.0).abs() < 1e-7, "{g:?}");
        let op = optimize_code_gap(&pauli_z(), &span, PrimalNorm::Operator).unwrap();
        assert!((op.primal_value - 4.0).abs() < 1e-7, "{op:?}");
        let zero = optimize_code_gap(&CMat::zeros(2, 2), &span, PrimalNorm::Trace).unwrap();
        assert!(zero.primal_value.abs() < 1e-8 && zero.dual_value.abs() < 1e-8);
    }

    #[test]
    fn code_pair_json_round_trip() {
        let code = build_code(&pauli_z()).unwrap();
        let back = CodePair::from_json(&code.to_json()).unwrap();
        assert_eq!(back, code);
        assert!(CodePair::from_json(
            r#"{"system_dim":2,"ancilla_dim":1,"c0":{"re":[1,0],"im":[0,0]},"c1":{"re":[1,0],"im":[0,0]}}"#
        )
        .is_err());
        assert!(CodePair::from_json(
            r#"{"system_dim":2,"ancilla_dim":1,"c0":{"re":[1],"im":[0]},"c1":{"re":[0,1],"im":[0,0]}}"#
        )
        .is_err());
        assert!(CodePair::from_json("[]").is_err());
    }
}
