// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense primal-dual interior-point solver for small block-diagonal SDPs.
//!
//! Problems are stated in standard primal form
//!
//! ```text
//!   min/max <C, X>   s.t.  <A_i, X> = b_i,  X = diag(X_1, ..., X_k) >= 0
//! ```
//!
//! with dual `max/min b.y s.t. C - sum_i y_i A_i >= 0` (signs flipped for
//! maximization). Each iteration uses Nesterov-Todd scaling, a
//! Mehrotra predictor-corrector step and a dense Cholesky factorization of
//! the Schur complement. Complex Hermitian programs enter through
//! [`complex_embed`].

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, c, CMat, RMat};

pub const DEFAULT_TOL: f64 = 1e-8;
const STEP_FRACTION: f64 = 0.98;
const INFEASIBILITY_RATIO: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid SDP: {0}")]
    InvalidProblem(String),
    #[error(
        "no convergence after {iterations} iterations \
         (gap {gap:.3e}, primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e})"
    )]
    MaxIter { iterations: usize, gap: f64, primal_residual: f64, dual_residual: f64 },
    #[error("Newton system became numerically singular at iteration {0}")]
    NumericalFailure(usize),
    #[error("solver terminated with status {0:?}")]
    NotOptimal(SdpStatus),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
}

/// Block-diagonal symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    blocks: Vec<RMat>,
}

impl BlockMatrix {
    pub fn zeros(dims: &[usize]) -> Self {
        Self { blocks: dims.iter().map(|&d| RMat::zeros(d, d)).collect() }
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self { blocks: dims.iter().map(|&d| RMat::identity(d, d)).collect() }
    }

    pub fn from_blocks(blocks: Vec<RMat>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[RMat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &RMat {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut RMat {
        &mut self.blocks[k]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &BlockMatrix) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dot(b)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b * s).collect() }
    }

    fn axpy(&mut self, s: f64, other: &BlockMatrix) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b * s;
        }
    }

    fn sub(&self, other: &BlockMatrix) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    fn symmetrized(mut self) -> Self {
        for b in &mut self.blocks {
            *b = (&*b + b.transpose()) * 0.5;
        }
        self
    }

    fn map_blocks(&self, f: impl Fn(usize, &RMat) -> RMat) -> Self {
        Self { blocks: self.blocks.iter().enumerate().map(|(k, b)| f(k, b)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub a: BlockMatrix,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub objective: BlockMatrix,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
}

impl SdpProblem {
    pub fn new(block_dims: Vec<usize>, sense: Sense) -> Self {
        let objective = BlockMatrix::zeros(&block_dims);
        Self { block_dims, objective, constraints: Vec::new(), sense }
    }

    pub fn set_objective(&mut self, c: BlockMatrix) {
        self.objective = c;
    }

    pub fn add_constraint(&mut self, a: BlockMatrix, b: f64) {
        self.constraints.push(Constraint { a, b });
    }

    /// Zero block matrix with this problem's block structure.
    pub fn zero_block(&self) -> BlockMatrix {
        BlockMatrix::zeros(&self.block_dims)
    }

    /// Program whose dual is the linear matrix inequality
    /// `max b.y s.t. c - sum_i y_i a_i >= 0`. The LMI optimum is the
    /// solution's `dual_value` and its maximizer the solution's `y`.
    pub fn lmi(c: BlockMatrix, a: Vec<BlockMatrix>, b: Vec<f64>) -> Self {
        let block_dims = c.dims();
        let constraints = a.into_iter().zip(b).map(|(a, b)| Constraint { a, b }).collect();
        Self { block_dims, objective: c, constraints, sense: Sense::Min }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.block_dims.is_empty() || self.block_dims.contains(&0) {
            return Err("block sizes must be positive".into());
        }
        if self.constraints.is_empty() {
            return Err("at least one constraint is required".into());
        }
        let check = |m: &BlockMatrix, what: &str| -> Result<(), String> {
            if m.dims() != self.block_dims || m.blocks.iter().any(|b| !b.is_square()) {
                return Err(format!("{what} does not match block structure {:?}", self.block_dims));
            }
            for b in &m.blocks {
                if b.iter().any(|v| !v.is_finite()) {
                    return Err(format!("{what} has non-finite entries"));
                }
                let scale = 1.0 + b.amax();
                if (b - b.transpose()).amax() > 1e-10 * scale {
                    return Err(format!("{what} is not symmetric"));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (i, con) in self.constraints.iter().enumerate() {
            check(&con.a, &format!("constraint {i}"))?;
            if !con.b.is_finite() {
                return Err(format!("constraint {i} has a non-finite right-hand side"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ProblemWire::from(self)).expect("SDP wire form is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, SolverError> {
        let wire: ProblemWire = serde_json::from_str(text).map_err(|e| SolverError::InvalidProblem(e.to_string()))?;
        let problem = wire.into_problem()?;
        problem.validate().map_err(SolverError::InvalidProblem)?;
        Ok(problem)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintWire {
    a: Vec<Vec<Vec<f64>>>,
    b: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemWire {
    sense: Sense,
    block_dims: Vec<usize>,
    objective: Vec<Vec<Vec<f64>>>,
    constraints: Vec<ConstraintWire>,
}

fn blocks_to_wire(m: &BlockMatrix) -> Vec<Vec<Vec<f64>>> {
    m.blocks.iter().map(|b| (0..b.nrows()).map(|i| b.row(i).iter().copied().collect()).collect()).collect()
}

fn blocks_from_wire(w: Vec<Vec<Vec<f64>>>) -> Result<BlockMatrix, SolverError> {
    let mut blocks = Vec::with_capacity(w.len());
    for rows in w {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(SolverError::InvalidProblem("blocks must be square".into()));
        }
        blocks.push(RMat::from_fn(n, n, |i, j| rows[i][j]));
    }
    Ok(BlockMatrix { blocks })
}

impl From<&SdpProblem> for ProblemWire {
    fn from(p: &SdpProblem) -> Self {
        Self {
            sense: p.sense,
            block_dims: p.block_dims.clone(),
            objective: blocks_to_wire(&p.objective),
            constraints: p.constraints.iter().map(|c| ConstraintWire { a: blocks_to_wire(&c.a), b: c.b }).collect(),
        }
    }
}

impl ProblemWire {
    fn into_problem(self) -> Result<SdpProblem, SolverError> {
        let objective = blocks_from_wire(self.objective)?;
        let constraints = self
            .constraints
            .into_iter()
            .map(|c| Ok(Constraint { a: blocks_from_wire(c.a)?, b: c.b }))
            .collect::<Result<_, SolverError>>()?;
        Ok(SdpProblem { block_dims: self.block_dims, objective, constraints, sense: self.sense })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Relative duality gap `|primal - dual| / (1 + |primal|)`.
    pub gap_tol: f64,
    /// Relative primal and dual residual norms.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { gap_tol: DEFAULT_TOL, feas_tol: DEFAULT_TOL, max_iter: 200 }
    }
}

impl SolverSettings {
    pub fn tight() -> Self {
        Self { gap_tol: 1e-11, feas_tol: 1e-11, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    /// `<C, X>` in the caller's sense.
    pub primal_value: f64,
    /// `b.y` of the dual program in the caller's sense.
    pub dual_value: f64,
    pub x: BlockMatrix,
    pub y: Vec<f64>,
    /// Dual slack `C - sum_i y_i A_i` (negated for maximization).
    pub z: BlockMatrix,
    pub status: SdpStatus,
    pub iterations: usize,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SdpSolution {
    pub fn require_optimal(self) -> Result<Self, SolverError> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            s => Err(SolverError::NotOptimal(s)),
        }
    }
}

/// Nesterov-Todd scaling of one block: `G^{-1} X G^{-T} = G^T Z G = diag(lambda)`.
struct Scaling {
    g: RMat,
    g_inv: RMat,
    w: RMat,
    lambda: DVector<f64>,
    chol_x: RMat,
    chol_z: RMat,
}

fn nt_scaling(x: &RMat, z: &RMat) -> Option<Scaling> {
    let l = x.clone().cholesky()?.l();
    let r = z.clone().cholesky()?.l();
    let svd = (r.transpose() * &l).svd(false, true);
    let vt = svd.v_t?;
    let s = svd.singular_values;
    if s.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let inv_half = RMat::from_diagonal(&s.map(|v| 1.0 / v.sqrt()));
    let half = RMat::from_diagonal(&s.map(f64::sqrt));
    let g = &l * vt.transpose() * inv_half;
    let l_inv = l.solve_lower_triangular(&RMat::identity(l.nrows(), l.nrows()))?;
    let g_inv = half * &vt * l_inv;
    let w = &g * g.transpose();
    Some(Scaling { g, g_inv, w, lambda: s, chol_x: l, chol_z: r })
}

/// Largest `alpha` keeping `L L^T + alpha D` positive semidefinite.
fn max_step(chol: &RMat, d: &RMat) -> f64 {
    let Some(l_inv) = chol.clone().solve_lower_triangular(&RMat::identity(chol.nrows(), chol.nrows())) else {
        return 0.0;
    };
    let m = &l_inv * d * l_inv.transpose();
    let min = linalg::eigvalsh_real(&m)[0];
    if min < 0.0 {
        -1.0 / min
    } else {
        f64::INFINITY
    }
}

struct Iterate {
    x: BlockMatrix,
    y: Vec<f64>,
    z: BlockMatrix,
}

pub fn solve(problem: &SdpProblem) -> Result<SdpSolution, SolverError> {
    solve_with(problem, &SolverSettings::default())
}

pub fn solve_with(problem: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution, SolverError> {
    problem.validate().map_err(SolverError::InvalidProblem)?;
    let sign = match problem.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let cmat = problem.objective.scaled(sign);
    let a: Vec<&BlockMatrix> = problem.constraints.iter().map(|c| &c.a).collect();
    let b: Vec<f64> = problem.constraints.iter().map(|c| c.b).collect();
    let m = a.len();
    let dims = problem.block_dims.clone();
    let n_total: usize = dims.iter().sum();

    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = cmat.norm();
    let mut it = Iterate {
        x: BlockMatrix::identity(&dims).scaled(1.0 + b_norm),
        y: vec![0.0; m],
        z: BlockMatrix::identity(&dims).scaled(1.0 + c_norm),
    };

    let apply_a = |x: &BlockMatrix| -> Vec<f64> { a.iter().map(|ai| ai.dot(x)).collect() };
    let apply_at = |y: &[f64]| -> BlockMatrix {
        let mut out = BlockMatrix::zeros(&dims);
        for (ai, &yi) in a.iter().zip(y) {
            if yi != 0.0 {
                out.axpy(yi, ai);
            }
        }
        out
    };

    let finish = |it: Iterate, status: SdpStatus, iterations: usize, res: (f64, f64, f64)| {
        let pobj = cmat.dot(&it.x);
        let dobj: f64 = b.iter().zip(&it.y).map(|(bi, yi)| bi * yi).sum();
        SdpSolution {
            primal_value: sign * pobj,
            dual_value: sign * dobj,
            x: it.x,
            y: it.y.iter().map(|v| sign * v).collect(),
            z: it.z.scaled(sign),
            status,
            iterations,
            gap: res.0,
            primal_residual: res.1,
            dual_residual: res.2,
        }
    };

    for iter in 0..=settings.max_iter {
        let ax = apply_a(&it.x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, v)| bi - v).collect();
        let rd = cmat.sub(&it.z).sub(&apply_at(&it.y));
        let pobj = cmat.dot(&it.x);
        let dobj: f64 = b.iter().zip(&it.y).map(|(bi, yi)| bi * yi).sum();
        let rp_norm = rp.iter().map(|v| v * v).sum::<f64>().sqrt();
        let pres = rp_norm / (1.0 + b_norm);
        let dres = rd.norm() / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        let res = (gap, pres, dres);

        if gap <= settings.gap_tol && pres <= settings.feas_tol && dres <= settings.feas_tol {
            return Ok(finish(it, SdpStatus::Optimal, iter, res));
        }
        if dobj > INFEASIBILITY_RATIO * (1.0 + c_norm + rd.norm()) {
            return Ok(finish(it, SdpStatus::PrimalInfeasible, iter, res));
        }
        if -pobj > INFEASIBILITY_RATIO * (1.0 + b_norm + rp_norm) {
            return Ok(finish(it, SdpStatus::DualInfeasible, iter, res));
        }
        let acceptable = gap <= DEFAULT_TOL && pres <= DEFAULT_TOL && dres <= DEFAULT_TOL;
        if iter == settings.max_iter {
            if acceptable {
                return Ok(finish(it, SdpStatus::Optimal, iter, res));
            }
            return Err(SolverError::MaxIter { iterations: iter, gap, primal_residual: pres, dual_residual: dres });
        }

        let step = newton_step(&it, &a, &rp, &rd, n_total);
        let Some((dx, dy, dz, alpha_p, alpha_d)) = step else {
            if acceptable {
                return Ok(finish(it, SdpStatus::Optimal, iter, res));
            }
            return Err(SolverError::NumericalFailure(iter));
        };
        if alpha_p.max(alpha_d) < 1e-12 {
            if acceptable {
                return Ok(finish(it, SdpStatus::Optimal, iter, res));
            }
            return Err(SolverError::NumericalFailure(iter));
        }
        it.x.axpy(alpha_p, &dx);
        it.x = std::mem::replace(&mut it.x, BlockMatrix::zeros(&[])).symmetrized();
        for (yi, di) in it.y.iter_mut().zip(&dy) {
            *yi += alpha_d * di;
        }
        it.z.axpy(alpha_d, &dz);
        it.z = std::mem::replace(&mut it.z, BlockMatrix::zeros(&[])).symmetrized();
    }
    unreachable!("loop returns on the final iteration")
}

type Step = (BlockMatrix, Vec<f64>, BlockMatrix, f64, f64);

fn newton_step(it: &Iterate, a: &[&BlockMatrix], rp: &[f64], rd: &BlockMatrix, n_total: usize) -> Option<Step> {
    let m = a.len();
    let scalings: Vec<Scaling> =
        it.x.blocks.iter().zip(&it.z.blocks).map(|(x, z)| nt_scaling(x, z)).collect::<Option<_>>()?;
    let mu = it.x.dot(&it.z) / n_total as f64;

    let waw: Vec<BlockMatrix> =
        a.iter().map(|ai| ai.map_blocks(|k, blk| &scalings[k].w * blk * &scalings[k].w)).collect();
    let mut schur = RMat::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = a[i].dot(&waw[j]);
            schur[(i, j)] = v;
            schur[(j, i)] = v;
        }
    }
    let chol = match schur.clone().cholesky() {
        Some(ch) => ch,
        None => {
            let reg = 1e-14 * (1.0 + schur.diagonal().amax());
            (schur + RMat::identity(m, m) * reg).cholesky()?
        }
    };
    let w_rd_w = rd.map_blocks(|k, blk| &scalings[k].w * blk * &scalings[k].w);
    let a_wrdw: Vec<f64> = a.iter().map(|ai| ai.dot(&w_rd_w)).collect();

    // Solves the Newton system for a scaled complementarity right-hand side D.
    let direction = |d: &BlockMatrix| -> (BlockMatrix, Vec<f64>, BlockMatrix) {
        let gdg = d.map_blocks(|k, blk| &scalings[k].g * blk * scalings[k].g.transpose());
        let rhs = DVector::from_iterator(m, (0..m).map(|i| rp[i] - a[i].dot(&gdg) + a_wrdw[i]));
        let dy = chol.solve(&rhs);
        let mut dz = rd.clone();
        for (ai, &v) in a.iter().zip(dy.iter()) {
            dz.axpy(-v, ai);
        }
        let wdzw = dz.map_blocks(|k, blk| &scalings[k].w * blk * &scalings[k].w);
        let dx = gdg.sub(&wdzw).symmetrized();
        (dx, dy.iter().copied().collect(), dz.symmetrized())
    };
    let steps = |dx: &BlockMatrix, dz: &BlockMatrix| -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for (k, s) in scalings.iter().enumerate() {
            ap = ap.min(max_step(&s.chol_x, dx.block(k)));
            ad = ad.min(max_step(&s.chol_z, dz.block(k)));
        }
        (ap, ad)
    };

    // Predictor: affine-scaling direction.
    let d_aff = BlockMatrix { blocks: scalings.iter().map(|s| RMat::from_diagonal(&(-&s.lambda))).collect() };
    let (dx_a, _, dz_a) = direction(&d_aff);
    let (ap, ad) = steps(&dx_a, &dz_a);
    let (ap, ad) = (ap.min(1.0), ad.min(1.0));
    let mut xa = it.x.clone();
    xa.axpy(ap, &dx_a);
    let mut za = it.z.clone();
    za.axpy(ad, &dz_a);
    let mu_aff = xa.dot(&za) / n_total as f64;
    let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

    // Corrector: centering plus second-order term.
    let d_cor = BlockMatrix {
        blocks: scalings
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let dxt = &s.g_inv * dx_a.block(k) * s.g_inv.transpose();
                let dzt = s.g.transpose() * dz_a.block(k) * &s.g;
                let prod = &dxt * &dzt;
                let sym = (&prod + prod.transpose()) * 0.5;
                let n = s.lambda.len();
                RMat::from_fn(n, n, |i, j| {
                    let mut rc = -sym[(i, j)];
                    if i == j {
                        rc += sigma * mu - s.lambda[i] * s.lambda[i];
                    }
                    2.0 * rc / (s.lambda[i] + s.lambda[j])
                })
            })
            .collect(),
    };
    let (dx, dy, dz) = direction(&d_cor);
    let (ap, ad) = steps(&dx, &dz);
    let alpha_p = (STEP_FRACTION * ap).min(1.0);
    let alpha_d = (STEP_FRACTION * ad).min(1.0);
    Some((dx, dy, dz, alpha_p, alpha_d))
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian
/// matrix. Its spectrum is that of `H` with doubled multiplicities.
pub fn complex_embed(h: &CMat) -> Result<RMat, crate::Error> {
    linalg::ensure_hermitian(h, 1e-9)?;
    Ok(embed_any(h))
}

/// Embedding without the Hermiticity check.
pub fn embed_any(h: &CMat) -> RMat {
    let n = h.nrows();
    let k = h.ncols();
    let mut out = RMat::zeros(2 * n, 2 * k);
    for i in 0..n {
        for j in 0..k {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(n + i, k + j)] = z.re;
            out[(i, k + j)] = -z.im;
            out[(n + i, j)] = z.im;
        }
    }
    out
}

/// Constraint matrix `A` with `<A, embed(Y)> = Re Tr(H Y)` for Hermitian `H`.
pub fn embed_half(h: &CMat) -> RMat {
    embed_any(h) * 0.5
}

/// Hermitian matrix represented by a real `2n x 2n` solution block, averaging
/// over the two copies.
pub fn complex_unembed(x: &RMat) -> CMat {
    let n = x.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(n + i, n + j)]);
        let im = 0.5 * (x[(n + i, j)] - x[(i, n + j)]);
        c(re, im)
    })
}

/// Hermitian unit matrices `E` with `Tr(E Y) = Re Y_ab` and `Tr(E' Y) = Im Y_ab`.
pub fn entry_selectors(n: usize, a: usize, b: usize) -> (CMat, CMat) {
    let mut re = CMat::zeros(n, n);
    let mut im = CMat::zeros(n, n);
    re[(b, a)] += c(0.5, 0.0);
    re[(a, b)] += c(0.5, 0.0);
    im[(b, a)] += c(0.0, -0.5);
    im[(a, b)] += c(0.0, 0.5);
    (re, im)
}

/// `min Tr(P + Q)/2 s.t. [[P, M^dagger], [M, Q]] >= 0`, whose optimum is the
/// trace norm of `M`.
pub fn trace_norm_program(m: &CMat) -> SdpProblem {
    let (p, q) = m.shape();
    let n = p + q;
    let mut prob = SdpProblem::new(vec![2 * n], Sense::Min);
    prob.set_objective(BlockMatrix::from_blocks(vec![RMat::identity(2 * n, 2 * n) * 0.25]));
    for i in 0..p {
        for j in 0..q {
            let (re, im) = entry_selectors(n, q + i, j);
            prob.add_constraint(BlockMatrix::from_blocks(vec![embed_half(&re)]), m[(i, j)].re);
            prob.add_constraint(BlockMatrix::from_blocks(vec![embed_half(&im)]), m[(i, j)].im);
        }
    }
    prob
}

/// Trace norm (sum of singular values) computed by semidefinite programming.
pub fn trace_norm_sdp(m: &CMat) -> Result<f64, SolverError> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let sol = solve_with(&trace_norm_program(m), &SolverSettings::tight())?.require_optimal()?;
    Ok(sol.primal_value)
}
