// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Optimal control of the encoding dynamics: gradient ascent of the terminal
//! QFI over piecewise-constant control amplitudes, the time-dependent
//! unitary bound, and reversal of the free evolution.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher;
use crate::linalg::{self, c, CMat, CVec};
use crate::qcore::{hamiltonian_superoperator, lindblad_superoperator, DensityMatrix, STATE_TOL};

/// Parameter-dependent free Hamiltonian `H0(x, t)`.
pub trait Drift: Send + Sync {
    fn hamiltonian(&self, x: f64, t: f64) -> CMat;
    /// `dH0/dx` at `(x, t)`.
    fn derivative(&self, x: f64, t: f64) -> CMat;
}

/// `H0(x) = base + x * generator`, constant in time.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDrift {
    pub base: CMat,
    pub generator: CMat,
}

impl LinearDrift {
    pub fn new(base: CMat, generator: CMat) -> Result<Self> {
        linalg::ensure_hermitian(&base, STATE_TOL)?;
        linalg::ensure_hermitian(&generator, STATE_TOL)?;
        if base.shape() != generator.shape() {
            return Err(Error::DimensionMismatch { expected: base.nrows(), found: generator.nrows() });
        }
        Ok(Self { base, generator })
    }

    /// `H0(x) = x * generator`.
    pub fn scaled(generator: CMat) -> Result<Self> {
        let n = generator.nrows();
        Self::new(CMat::zeros(n, n), generator)
    }
}

impl Drift for LinearDrift {
    fn hamiltonian(&self, x: f64, _t: f64) -> CMat {
        &self.base + &self.generator * c(x, 0.0)
    }

    fn derivative(&self, _x: f64, _t: f64) -> CMat {
        self.generator.clone()
    }
}

/// Drift given by a pair of closures for `H0` and `dH0/dx`.
pub struct FnDrift<H, D> {
    pub hamiltonian: H,
    pub derivative: D,
}

impl<H, D> Drift for FnDrift<H, D>
where
    H: Fn(f64, f64) -> CMat + Send + Sync,
    D: Fn(f64, f64) -> CMat + Send + Sync,
{
    fn hamiltonian(&self, x: f64, t: f64) -> CMat {
        (self.hamiltonian)(x, t)
    }

    fn derivative(&self, x: f64, t: f64) -> CMat {
        (self.derivative)(x, t)
    }
}

/// `H = H0(x, t) + sum_k V_k(t) H_k` under Lindblad noise, discretized into
/// `steps` equal intervals on `[0, total_time]`. Within each interval the
/// drift is frozen at the interval midpoint.
#[derive(Clone)]
pub struct ControlProblem {
    drift: Arc<dyn Drift>,
    x: f64,
    controls: Vec<CMat>,
    noise_ops: Vec<CMat>,
    rates: Vec<f64>,
    total_time: f64,
    steps: usize,
    bounds: (f64, f64),
}

impl std::fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ControlProblem")
            .field("x", &self.x)
            .field("controls", &self.controls.len())
            .field("noise_ops", &self.noise_ops.len())
            .field("total_time", &self.total_time)
            .field("steps", &self.steps)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl ControlProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        drift: Arc<dyn Drift>,
        x: f64,
        controls: Vec<CMat>,
        noise_ops: Vec<CMat>,
        rates: Vec<f64>,
        total_time: f64,
        steps: usize,
        bounds: (f64, f64),
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("total time {total_time} must be positive")));
        }
        if !(bounds.0.is_finite() && bounds.1.is_finite() && bounds.0 <= bounds.1) {
            return Err(Error::InvalidArgument(format!("invalid amplitude bounds {bounds:?}")));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        let h0 = drift.hamiltonian(x, 0.0);
        let d = linalg::ensure_square(&h0)?;
        linalg::ensure_hermitian(&h0, STATE_TOL)?;
        linalg::ensure_hermitian(&drift.derivative(x, 0.0), STATE_TOL)?;
        for h in &controls {
            if h.shape() != (d, d) {
                return Err(Error::DimensionMismatch { expected: d, found: h.nrows() });
            }
            linalg::ensure_hermitian(h, STATE_TOL)?;
        }
        if noise_ops.len() != rates.len() {
            return Err(Error::DimensionMismatch { expected: noise_ops.len(), found: rates.len() });
        }
        for g in &noise_ops {
            if g.shape() != (d, d) {
                return Err(Error::DimensionMismatch { expected: d, found: g.nrows() });
            }
        }
        if let Some(&r) = rates.iter().find(|r| !(**r >= 0.0)) {
            return Err(Error::NegativeRate(r));
        }
        Ok(Self { drift, x, controls, noise_ops, rates, total_time, steps, bounds })
    }

    pub fn dim(&self) -> usize {
        self.drift.hamiltonian(self.x, 0.0).nrows()
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn controls(&self) -> &[CMat] {
        &self.controls
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn drift(&self) -> &dyn Drift {
        self.drift.as_ref()
    }

    /// Same problem at a different parameter value.
    pub fn with_x(&self, x: f64) -> Result<Self> {
        Self::new(
            self.drift.clone(),
            x,
            self.controls.clone(),
            self.noise_ops.clone(),
            self.rates.clone(),
            self.total_time,
            self.steps,
            self.bounds,
        )
    }

    pub fn zero_field(&self) -> ControlField {
        ControlField { amplitudes: DMatrix::zeros(self.steps, self.controls.len()) }
    }

    fn check_field(&self, field: &ControlField) -> Result<()> {
        let (r, k) = field.amplitudes.shape();
        if r != self.steps {
            return Err(Error::DimensionMismatch { expected: self.steps, found: r });
        }
        if k != self.controls.len() {
            return Err(Error::DimensionMismatch { expected: self.controls.len(), found: k });
        }
        if field.amplitudes.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    fn midpoint(&self, step: usize) -> f64 {
        (step as f64 + 0.5) * self.dt()
    }

    /// Extended generator `[[L, 0], [dL, L]]` acting on `(vec rho, vec d rho)`.
    fn extended_generator(&self, field: &ControlField, step: usize) -> CMat {
        let t = self.midpoint(step);
        let mut h = self.drift.hamiltonian(self.x, t);
        for (k, hk) in self.controls.iter().enumerate() {
            h += hk * c(field.amplitudes[(step, k)], 0.0);
        }
        let l = lindblad_superoperator(&linalg::hermitian_part(&h), &self.noise_ops, &self.rates);
        let dl = hamiltonian_superoperator(&linalg::hermitian_part(&self.drift.derivative(self.x, t)));
        let n = l.nrows();
        let mut g = CMat::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&l);
        g.view_mut((n, n), (n, n)).copy_from(&l);
        g.view_mut((n, 0), (n, n)).copy_from(&dl);
        g
    }

    fn step_propagator(&self, field: &ControlField, step: usize) -> CMat {
        linalg::expm(&(self.extended_generator(field, step) * c(self.dt(), 0.0)))
    }

    /// Extended generator direction `d G / d V_k`, block diagonal.
    fn control_direction(&self, k: usize) -> CMat {
        let lk = hamiltonian_superoperator(&self.controls[k]);
        let n = lk.nrows();
        let mut g = CMat::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&lk);
        g.view_mut((n, n), (n, n)).copy_from(&lk);
        g
    }
}

/// Piecewise-constant amplitudes, one row per time step and one column per
/// control Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    pub amplitudes: DMatrix<f64>,
}

impl ControlField {
    pub fn new(amplitudes: DMatrix<f64>) -> Self {
        Self { amplitudes }
    }

    pub fn constant(steps: usize, values: &[f64]) -> Self {
        Self { amplitudes: DMatrix::from_fn(steps, values.len(), |_, k| values[k]) }
    }

    pub fn steps(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn num_controls(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn clipped(&self, bounds: (f64, f64)) -> Self {
        Self { amplitudes: self.amplitudes.map(|v| v.clamp(bounds.0, bounds.1)) }
    }

    /// CSV with a `V1,...,VP` header and one row per time step.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = (1..=self.num_controls()).map(|k| format!("V{k}")).collect();
        w.write_record(&header).map_err(csv_err)?;
        for row in self.amplitudes.row_iter() {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
        let cols = r.headers().map_err(csv_err)?.len();
        if cols == 0 {
            return Err(Error::Serialization("control field needs at least one column".into()));
        }
        let mut values = Vec::new();
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != cols {
                return Err(Error::Serialization(format!("row {rows} has {} fields, expected {cols}", rec.len())));
            }
            for f in rec.iter() {
                let v: f64 = f.parse().map_err(|_| Error::Serialization(format!("invalid amplitude {f:?}")))?;
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                values.push(v);
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(Error::Serialization("control field has no time steps".into()));
        }
        Ok(Self { amplitudes: DMatrix::from_row_slice(rows, cols, &values) })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

fn stack(rho: &CMat, drho: &CMat) -> CVec {
    let a = linalg::vec_col(rho);
    let b = linalg::vec_col(drho);
    let mut v = CVec::zeros(a.len() + b.len());
    v.rows_mut(0, a.len()).copy_from(&a);
    v.rows_mut(a.len(), b.len()).copy_from(&b);
    v
}

fn unstack(v: &CVec, d: usize) -> (CMat, CMat) {
    let n = d * d;
    let rho = linalg::unvec_col(&v.rows(0, n).into_owned(), d, d);
    let drho = linalg::unvec_col(&v.rows(n, n).into_owned(), d, d);
    (rho, drho)
}

fn check_input(problem: &ControlProblem, rho_in: &DensityMatrix) -> Result<()> {
    if rho_in.dim() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), found: rho_in.dim() });
    }
    Ok(())
}

/// Joint propagation of `(rho, d rho/dx)` to the final time.
pub fn propagate_with_derivative(
    problem: &ControlProblem,
    field: &ControlField,
    rho_in: &DensityMatrix,
) -> Result<(DensityMatrix, CMat)> {
    problem.check_field(field)?;
    check_input(problem, rho_in)?;
    let d = problem.dim();
    let mut s = stack(rho_in.matrix(), &CMat::zeros(d, d));
    for step in 0..problem.steps {
        s = problem.step_propagator(field, step) * s;
    }
    finish(&s, d)
}

fn finish(s: &CVec, d: usize) -> Result<(DensityMatrix, CMat)> {
    let (rho, drho) = unstack(s, d);
    if rho.iter().chain(drho.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok((DensityMatrix::from_propagated(rho), linalg::hermitian_part(&drho)))
}

/// QFI of the final state with respect to the drift parameter.
pub fn terminal_qfi(problem: &ControlProblem, field: &ControlField, rho_in: &DensityMatrix) -> Result<f64> {
    let (rho, drho) = propagate_with_derivative(problem, field, rho_in)?;
    qfi_checked(&rho, &drho)
}

fn qfi_checked(rho: &DensityMatrix, drho: &CMat) -> Result<f64> {
    let f = fisher::sld(rho, drho)?.qfi;
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::NonFinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GradientMethod {
    /// Central differences over each amplitude with step `step`.
    FiniteDifference { step: f64 },
    /// Backward sweep through the stored propagators with exact
    /// derivatives of each step exponential.
    Adjoint,
}

impl Default for GradientMethod {
    fn default() -> Self {
        GradientMethod::FiniteDifference { step: 1e-5 }
    }
}

/// Forward states `s_0..s_N` and step propagators of one trajectory.
struct Trajectory {
    props: Vec<CMat>,
    states: Vec<CVec>,
}

fn trajectory(problem: &ControlProblem, field: &ControlField, rho_in: &DensityMatrix) -> Trajectory {
    let d = problem.dim();
    let props: Vec<CMat> = (0..problem.steps).into_par_iter().map(|j| problem.step_propagator(field, j)).collect();
    let mut states = Vec::with_capacity(problem.steps + 1);
    states.push(stack(rho_in.matrix(), &CMat::zeros(d, d)));
    for p in &props {
        let next = p * states.last().expect("nonempty");
        states.push(next);
    }
    Trajectory { props, states }
}

/// `dF/dV_k(t)` as a `steps x P` matrix.
pub fn qfi_gradient(
    problem: &ControlProblem,
    field: &ControlField,
    rho_in: &DensityMatrix,
    method: GradientMethod,
) -> Result<DMatrix<f64>> {
    problem.check_field(field)?;
    check_input(problem, rho_in)?;
    match method {
        GradientMethod::FiniteDifference { step } => fd_gradient(problem, field, rho_in, step),
        GradientMethod::Adjoint => adjoint_gradient(problem, field, rho_in),
    }
}

fn fd_gradient(problem: &ControlProblem, field: &ControlField, rho_in: &DensityMatrix, h: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step {h} must be positive")));
    }
    let d = problem.dim();
    let n = problem.steps;
    let p = problem.controls.len();
    let traj = trajectory(problem, field, rho_in);
    // suffix[j] = P_{N-1} ... P_j, suffix[N] = I.
    let dim = traj.states[0].len();
    let mut suffix = vec![CMat::identity(dim, dim); n + 1];
    for j in (0..n).rev() {
        suffix[j] = &suffix[j + 1] * &traj.props[j];
    }
    let entries: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..p).map(move |k| (j, k))).collect();
    let values = entries
        .par_iter()
        .map(|&(j, k)| {
            let eval = |delta: f64| -> Result<f64> {
                let mut f = field.clone();
                f.amplitudes[(j, k)] += delta;
                let s = &suffix[j + 1] * (problem.step_propagator(&f, j) * &traj.states[j]);
                let (rho, drho) = finish(&s, d)?;
                qfi_checked(&rho, &drho)
            };
            Ok((eval(h)? - eval(-h)?) / (2.0 * h))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DMatrix::from_row_slice(n, p, &values))
}

/// Derivative of `exp(A)` along `E` from the block exponential
/// `exp([[A, E], [0, A]])`.
fn expm_frechet(a: &CMat, e: &CMat) -> CMat {
    let n = a.nrows();
    let mut b = CMat::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(a);
    b.view_mut((n, n), (n, n)).copy_from(a);
    b.view_mut((0, n), (n, n)).copy_from(e);
    linalg::expm(&b).view((0, n), (n, n)).into_owned()
}

fn adjoint_gradient(problem: &ControlProblem, field: &ControlField, rho_in: &DensityMatrix) -> Result<DMatrix<f64>> {
    let d = problem.dim();
    let n = problem.steps;
    let p = problem.controls.len();
    let dt = problem.dt();
    let traj = trajectory(problem, field, rho_in);
    let (rho, drho) = finish(&traj.states[n], d)?;
    let l = fisher::sld(&rho, &drho)?.sld;
    // dF = Tr(2 L d(drho)) - Tr(L^2 d rho), written as a row vector on the stacked state.
    let costate_t = stack(&(-(&l * &l)).transpose(), &(&l * c(2.0, 0.0)).transpose());
    let mut costates = vec![costate_t.transpose(); n + 1];
    for j in (0..n).rev() {
        costates[j] = &costates[j + 1] * &traj.props[j];
    }
    let directions: Vec<CMat> = (0..p).map(|k| problem.control_direction(k) * c(dt, 0.0)).collect();
    let rows = (0..n)
        .into_par_iter()
        .map(|j| {
            let a = problem.extended_generator(field, j) * c(dt, 0.0);
            directions
                .iter()
                .map(|e| {
                    let dp = expm_frechet(&a, e);
                    (&costates[j + 1] * (dp * &traj.states[j]))[(0, 0)].re
                })
                .collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(DMatrix::from_row_slice(n, p, &flat))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrapeConfig {
    pub learning_rate: f64,
    /// Ascent stops once backtracking pushes the rate below this value.
    pub min_learning_rate: f64,
    pub iterations: usize,
    pub gradient: GradientMethod,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, min_learning_rate: 1e-6, iterations: 100, gradient: GradientMethod::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrapeResult {
    pub field: ControlField,
    /// `F(T)` of the initial field followed by one entry per iteration.
    pub history: Vec<f64>,
    pub learning_rate: f64,
    /// Whether the rate fell below the minimum before `iterations` ran out.
    pub stalled: bool,
}

/// Gradient ascent of the terminal QFI with clipping to the amplitude
/// bounds. A step that lowers `F(T)` is rejected and the rate halved.
pub fn grape(
    problem: &ControlProblem,
    rho_in: &DensityMatrix,
    field_init: &ControlField,
    config: &GrapeConfig,
) -> Result<GrapeResult> {
    if config.iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    if !(config.learning_rate > 0.0 && config.min_learning_rate > 0.0) {
        return Err(Error::InvalidArgument("learning rates must be positive".into()));
    }
    problem.check_field(field_init)?;
    check_input(problem, rho_in)?;
    let mut field = field_init.clipped(problem.bounds);
    let mut f = terminal_qfi(problem, &field, rho_in)?;
    let mut history = vec![f];
    let mut rate = config.learning_rate;
    let mut stalled = false;
    for _ in 0..config.iterations {
        let g = qfi_gradient(problem, &field, rho_in, config.gradient)?;
        let mut accepted = false;
        while rate >= config.min_learning_rate {
            let cand = ControlField::new(&field.amplitudes + &g * rate).clipped(problem.bounds);
            let fc = terminal_qfi(problem, &cand, rho_in)?;
            if fc >= f {
                field = cand;
                f = fc;
                accepted = true;
                break;
            }
            rate *= 0.5;
        }
        history.push(f);
        if !accepted {
            stalled = true;
            break;
        }
    }
    Ok(GrapeResult { field, history, learning_rate: rate, stalled })
}

/// Square of `int_0^T (h_max - h_min) dt` for the eigenvalues of `dH/dx`,
/// integrated with the trapezoid rule on `steps` intervals.
pub fn pang_jordan_bound<F>(dh: F, total_time: f64, steps: usize) -> Result<f64>
where
    F: Fn(f64) -> CMat,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if !(total_time >= 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidArgument(format!("total time {total_time} must be nonnegative")));
    }
    let gap = |t: f64| -> Result<f64> {
        let h = dh(t);
        linalg::ensure_hermitian(&h, STATE_TOL)?;
        let v = linalg::eigh(&linalg::hermitian_part(&h)).values;
        Ok(v[v.len() - 1] - v[0])
    };
    let dt = total_time / steps as f64;
    let mut integral = 0.5 * (gap(0.0)? + gap(total_time)?);
    for j in 1..steps {
        integral += gap(j as f64 * dt)?;
    }
    integral *= dt;
    Ok(integral * integral)
}

/// Control Hamiltonian `-H(x_hat)` cancelling the free evolution at the
/// current estimate.
pub fn reversal_control<F>(h: F, x_hat: f64) -> CMat
where
    F: Fn(f64) -> CMat,
{
    -h(x_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y, pauli_z};
    use crate::qcore::PureState;
    use std::f64::consts::PI;

    fn half_z() -> CMat {
        pauli_z() * c(0.5, 0.0)
    }

    fn plus() -> DensityMatrix {
        PureState::plus().density_matrix()
    }

    fn free_problem(t: f64, steps: usize, controls: Vec<CMat>) -> ControlProblem {
        let drift = Arc::new(LinearDrift::scaled(half_z()).unwrap());
        ControlProblem::new(drift, 0.7, controls, vec![], vec![], t, steps, (-5.0, 5.0)).unwrap()
    }

    #[test]
    fn noiseless_free_evolution_qfi() {
        let p = free_problem(1.0, 4, vec![]);
        let f = terminal_qfi(&p, &p.zero_field(), &plus()).unwrap();
        assert!((f - 1.0).abs() < 1e-10, "{f}");
    }

    #[test]
    fn zero_parameter_derivative() {
        let drift = Arc::new(LinearDrift::new(half_z(), CMat::zeros(2, 2)).unwrap());
        let p =
            ControlProblem::new(drift, 0.3, vec![pauli_x()], vec![pauli_z()], vec![0.2], 2.0, 5, (-1.0, 1.0)).unwrap();
        let field = ControlField::constant(5, &[0.4]);
        let (_, drho) = propagate_with_derivative(&p, &field, &plus()).unwrap();
        assert_eq!(linalg::max_abs(&drho), 0.0);
    }

    #[test]
    fn derivative_is_traceless_and_matches_finite_difference() {
        let drift = Arc::new(LinearDrift::new(pauli_x() * c(0.3, 0.0), half_z()).unwrap());
        let p =
            ControlProblem::new(drift, 0.9, vec![pauli_y()], vec![pauli_z()], vec![0.1], 3.0, 12, (-2.0, 2.0)).unwrap();
        let field = ControlField::new(DMatrix::from_fn(12, 1, |j, _| (j as f64).sin()));
        let rho0 = DensityMatrix::from_bloch([0.3, 0.2, 0.5]).unwrap();
        let (_, drho) = propagate_with_derivative(&p, &field, &rho0).unwrap();
        assert!(linalg::trace(&drho).norm() < 1e-10);
        let h = 1e-5;
        let up = propagate_with_derivative(&p.with_x(0.9 + h).unwrap(), &field, &rho0).unwrap().0;
        let dn = propagate_with_derivative(&p.with_x(0.9 - h).unwrap(), &field, &rho0).unwrap().0;
        let fd = (up.matrix() - dn.matrix()) * c(0.5 / h, 0.0);
        assert!(linalg::max_abs(&(fd - &drho)) <= 1e-4 * linalg::max_abs(&drho));
    }

    #[test]
    fn adjoint_matches_finite_difference() {
        let drift = Arc::new(LinearDrift::scaled(half_z()).unwrap());
        let p = ControlProblem::new(
            drift,
            1.0,
            vec![pauli_x(), pauli_y(), pauli_z()],
            vec![pauli_z()],
            vec![0.1],
            2.0,
            8,
            (-3.0, 3.0),
        )
        .unwrap();
        let field = ControlField::new(DMatrix::from_fn(8, 3, |j, k| 0.1 * ((j + 2 * k) as f64).cos()));
        let rho0 = DensityMatrix::from_bloch([0.6, 0.0, 0.6]).unwrap();
        let fd = qfi_gradient(&p, &field, &rho0, GradientMethod::FiniteDifference { step: 1e-5 }).unwrap();
        let adj = qfi_gradient(&p, &field, &rho0, GradientMethod::Adjoint).unwrap();
        let scale = fd.amax();
        assert!(scale > 1e-3);
        assert!((fd - adj).amax() <= 1e-5 * scale);
    }

    #[test]
    fn grape_history_is_monotone_and_improves() {
        let drift = Arc::new(LinearDrift::scaled(half_z()).unwrap());
        let p = ControlProblem::new(
            drift,
            1.0,
            vec![pauli_x(), pauli_y()],
            vec![pauli_z()],
            vec![0.1],
            2.0,
            10,
            (-2.0, 2.0),
        )
        .unwrap();
        let rho0 = DensityMatrix::from_bloch([0.5, 0.0, 0.5]).unwrap();
        let cfg =
            GrapeConfig { iterations: 15, learning_rate: 0.5, gradient: GradientMethod::Adjoint, ..Default::default() };
        let r = grape(&p, &rho0, &p.zero_field(), &cfg).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(r.history.last().unwrap() > &r.history[0]);
        let (lo, hi) = p.bounds();
        assert!(r.field.amplitudes.iter().all(|v| (lo..=hi).contains(v)));
    }

    #[test]
    fn grape_flat_at_unitary_optimum() {
        let p = free_problem(1.0, 5, vec![pauli_x(), pauli_y()]);
        let cfg = GrapeConfig { iterations: 3, gradient: GradientMethod::Adjoint, ..Default::default() };
        let r = grape(&p, &plus(), &p.zero_field(), &cfg).unwrap();
        for f in &r.history {
            assert!((f - 1.0).abs() < 1e-8, "{f}");
        }
    }

    #[test]
    fn pang_jordan_examples() {
        assert!((pang_jordan_bound(|_| half_z(), 3.0, 10).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(pang_jordan_bound(|_| CMat::zeros(2, 2), 3.0, 10).unwrap(), 0.0);
        let b = pang_jordan_bound(|t| pauli_z() * c(t.cos(), 0.0), PI, 20000).unwrap();
        assert!((b - 16.0).abs() < 1e-6, "{b}");
        assert!(pang_jordan_bound(|_| half_z(), 1.0, 0).is_err());
    }

    #[test]
    fn reversal_cancels_free_evolution() {
        let h = |x: f64| pauli_z() * c(x, 0.0) + pauli_x() * c(0.2, 0.0);
        let hc = reversal_control(h, 0.4);
        assert!(linalg::max_abs(&(hc.clone() + h(0.4))) == 0.0);
        let residual = h(0.9) + &hc;
        assert!(linalg::max_abs(&(residual - pauli_z() * c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let f = ControlField::new(DMatrix::from_row_slice(2, 3, &[0.1, -2.5, 1e-300, 3.0, 0.0, -0.0]));
        let text = f.to_csv().unwrap();
        assert!(text.starts_with("V1,V2,V3\n"));
        assert_eq!(ControlField::from_csv(&text).unwrap(), f);
        assert!(ControlField::from_csv("V1\n").is_err());
        assert!(ControlField::from_csv("V1,V2\n1,2\n3\n").is_err());
        assert!(ControlField::from_csv("V1\nabc\n").is_err());
        assert!(ControlField::from_csv("V1\nNaN\n").is_err());
    }

    #[test]
    fn invalid_problems_rejected() {
        let drift: Arc<dyn Drift> = Arc::new(LinearDrift::scaled(half_z()).unwrap());
        assert!(ControlProblem::new(drift.clone(), 0.0, vec![], vec![], vec![], 1.0, 0, (0.0, 1.0)).is_err());
        assert!(ControlProblem::new(drift.clone(), 0.0, vec![], vec![], vec![], 1.0, 1, (1.0, 0.0)).is_err());
        assert!(ControlProblem::new(drift.clone(), 0.0, vec![CMat::zeros(3, 3)], vec![], vec![], 1.0, 1, (0.0, 1.0))
            .is_err());
        assert!(ControlProblem::new(drift, 0.0, vec![], vec![pauli_z()], vec![-1.0], 1.0, 1, (0.0, 1.0)).is_err());
        let p = free_problem(1.0, 3, vec![pauli_x()]);
        assert!(terminal_qfi(&p, &ControlField::constant(2, &[0.0]), &plus()).is_err());
    }
}
