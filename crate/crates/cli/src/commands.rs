// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Execution of validated jobs into a result document and a CSV table.

use std::f64::consts::PI;

use metrokit::channel::{ancilla_free_check, channel_fidelity, channel_qfi_fd, optimal_probe, ParameterizedChannel};
use metrokit::control::{grape, terminal_qfi, ControlField};
use metrokit::fisher::{qfi_from_bures, sld};
use metrokit::linalg::{CMat, C64};
use metrokit::mzi::{likelihood_table, pso_offline, simulate_adaptive, Policy, TwoModeFockState};
use metrokit::qcore::MatrixJson;
use metrokit::qec::{build_code, effective_qfi, hnls_decompose, lindblad_span, optimize_code_gap, verify_code};
use metrokit::random::rng;
use metrokit::stateopt::optimize_dicke;
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    AdaptiveMziParams, ChannelFidelityParams, FieldInit, GrapeParams, Job, MziTask, OptimalProbeParams, QecParams,
    QfiInput, QfiParams, StateOptParams,
};
use crate::CliError;

/// Plot-ready table written as `table.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub result: Value,
    pub table: Table,
}

/// One route to a scalar figure of merit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub method: &'static str,
    pub value: Option<f64>,
    pub dx: Option<f64>,
    pub solver_status: Option<String>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn record_table(records: &[Record]) -> Table {
    let mut t = Table::new(&["method", "value", "dx", "solver_status"]);
    for r in records {
        t.push(vec![r.method.into(), opt(r.value), opt(r.dx), r.solver_status.clone().unwrap_or_default()]);
    }
    t
}

fn matrix_json(m: &CMat) -> Value {
    serde_json::to_value(MatrixJson::from_matrix(m).expect("square matrix")).expect("matrix serializes")
}

fn complex_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

pub fn execute(job: &Job, seed: u64) -> Result<Artifacts, CliError> {
    match job {
        Job::Qfi(p) => qfi(p),
        Job::ChannelFidelity(p) => fidelity(p),
        Job::OptimalProbe(p) => probe(p),
        Job::Grape(p) => run_grape(p, seed),
        Job::QecCode(p) => qec(p),
        Job::AdaptiveMzi(p) => mzi(p, seed),
        Job::StateOpt(p) => state_opt(p),
    }
}

fn qfi(p: &QfiParams) -> Result<Artifacts, CliError> {
    let mut records = Vec::new();
    match p.source.build()? {
        QfiInput::State(rho, drho) => {
            let q = sld(&rho, &drho)?.qfi;
            records.push(Record { method: "sld", value: Some(q), dx: None, solver_status: None });
        }
        QfiInput::Channel { channel, input, x, dx } => {
            let k = channel.kraus(x)?;
            let out = k.apply(&input)?;
            let mut drho = CMat::zeros(out.dim(), out.dim());
            for (kj, dj) in k.kraus().iter().zip(channel.kraus_derivative(x)?) {
                drho += &dj * input.matrix() * kj.adjoint() + kj * input.matrix() * dj.adjoint();
            }
            let q = sld(&out, &drho)?.qfi;
            records.push(Record { method: "sld", value: Some(q), dx: None, solver_status: None });
            let bures = qfi_from_bures(|y| channel.kraus(y)?.apply(&input), x, dx);
            records.push(match bures {
                Ok(v) => Record { method: "bures", value: Some(v), dx: Some(dx), solver_status: None },
                Err(e) => Record { method: "bures", value: None, dx: Some(dx), solver_status: Some(e.to_string()) },
            });
        }
    }
    let value = records[0].value;
    let table = record_table(&records);
    Ok(Artifacts { result: json!({ "value": value, "records": records }), table })
}

fn fidelity(p: &ChannelFidelityParams) -> Result<Artifacts, CliError> {
    let ch = p.channel.build()?;
    let f = channel_fidelity(&ch.kraus(p.x1)?, &ch.kraus(p.x2)?)?;
    let angle = f.value.clamp(0.0, 1.0).acos();
    let mut table = Table::new(&["x1", "x2", "fidelity", "bures_angle"]);
    table.push(vec![num(p.x1), num(p.x2), num(f.value), num(angle)]);
    let result = json!({
        "method": "channel_fidelity",
        "value": f.value,
        "bures_angle": angle,
        "x1": p.x1,
        "x2": p.x2,
        "solver_status": "optimal",
        "iterations": f.info.iterations,
        "gap": f.info.gap,
    });
    Ok(Artifacts { result, table })
}

fn probe(p: &OptimalProbeParams) -> Result<Artifacts, CliError> {
    let (ch, dx) = p.build()?;
    let fd = channel_qfi_fd(&ch, p.x, dx)?;
    let opt = optimal_probe(&ch, p.x, dx)?;
    let records = vec![
        Record { method: "channel_fidelity_fd", value: Some(fd), dx: Some(dx), solver_status: Some("optimal".into()) },
        Record { method: "probe_sdp", value: Some(opt.qfi), dx: Some(dx), solver_status: Some("optimal".into()) },
    ];
    let result = json!({
        "value": opt.qfi,
        "records": records,
        "probe": matrix_json(opt.rho.matrix()),
        "probe_purity": opt.rho.purity(),
        "ancilla_free": ancilla_free_check(&ch, p.x, p.x + dx)?,
        "iterations": opt.info.iterations,
        "gap": opt.info.gap,
    });
    Ok(Artifacts { result, table: record_table(&records) })
}

fn run_grape(p: &GrapeParams, seed: u64) -> Result<Artifacts, CliError> {
    let setup = p.build()?;
    let problem = &setup.problem;
    let field = match (setup.field, &p.init) {
        (Some(f), _) => f,
        (None, FieldInit::Random { scale }) => {
            let mut r = rng(seed);
            let s = *scale;
            ControlField::new(DMatrix::from_fn(problem.steps(), problem.num_controls(), |_, _| {
                if s > 0.0 {
                    r.random_range(-s..=s)
                } else {
                    0.0
                }
            }))
        }
        (None, _) => unreachable!("only random initialization defers the field"),
    };
    let baseline = terminal_qfi(problem, &problem.zero_field(), &setup.input)?;
    let run = grape(problem, &setup.input, &field, &p.config)?;
    let mut table = Table::new(&["iter", "qfi"]);
    for (i, f) in run.history.iter().enumerate() {
        table.push(vec![i.to_string(), num(*f)]);
    }
    let amplitudes: Vec<Vec<f64>> =
        (0..run.field.steps()).map(|j| run.field.amplitudes.row(j).iter().copied().collect()).collect();
    let result = json!({
        "baseline_qfi": baseline,
        "initial_qfi": run.history[0],
        "final_qfi": run.history.last(),
        "iterations": run.history.len() - 1,
        "learning_rate": run.learning_rate,
        "stalled": run.stalled,
        "history": run.history,
        "field": amplitudes,
    });
    Ok(Artifacts { result, table })
}

fn qec(p: &QecParams) -> Result<Artifacts, CliError> {
    let setup = p.build()?;
    let d = setup.generator.nrows();
    let span = lindblad_span(d, &setup.noise)?;
    let rep = hnls_decompose(&setup.generator, &span)?;
    let code = match setup.code {
        Some(c) => Some(c),
        None if rep.hnls => Some(build_code(&rep.h_perp)?),
        None => None,
    };
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["hnls".into(), rep.hnls.to_string()]);
    table.push(vec!["perp_norm".into(), num(rep.perp_norm)]);
    table.push(vec!["span_dim".into(), span.len().to_string()]);
    let mut result = json!({
        "hnls": rep.hnls,
        "perp_norm": rep.perp_norm,
        "span_dim": span.len(),
        "h_perp": matrix_json(&rep.h_perp),
    });
    if let Some(code) = code {
        let check = verify_code(&code, &setup.noise, &setup.generator)?;
        let f = effective_qfi(check.gap, p.t)?;
        result["code"] = serde_json::from_str(&code.to_json()).expect("code JSON is valid");
        result["verification"] = json!({
            "passes": check.passes(),
            "condition1": check.condition1,
            "condition2": check.condition2,
            "condition3": check.condition3,
            "residual1": check.residual1,
            "residual2": check.residual2,
            "residual3": check.residual3,
            "gap": check.gap,
        });
        result["effective_qfi"] = json!(f);
        result["t"] = json!(p.t);
        for (k, v) in [("passes", check.passes().to_string()), ("code_gap", num(check.gap)), ("effective_qfi", num(f))]
        {
            table.push(vec![k.into(), v]);
        }
    }
    if rep.hnls {
        let gap = optimize_code_gap(&rep.h_perp, &span, p.norm)?;
        result["optimal_gap"] = json!({
            "norm": p.norm,
            "primal": gap.primal_value,
            "dual": gap.dual_value,
            "c_tilde": matrix_json(&gap.c_tilde),
        });
        table.push(vec!["optimal_gap_primal".into(), num(gap.primal_value)]);
        table.push(vec!["optimal_gap_dual".into(), num(gap.dual_value)]);
    }
    Ok(Artifacts { result, table })
}

fn true_phase(seed: u64) -> f64 {
    rng(seed ^ 0x5eed_f00d).random_range(-PI..PI)
}

fn mzi(p: &AdaptiveMziParams, seed: u64) -> Result<Artifacts, CliError> {
    let input: TwoModeFockState = p.build()?;
    match &p.task {
        MziTask::Run { policy, phi_true } => {
            let phi = phi_true.unwrap_or_else(|| true_phase(seed));
            let run = simulate_adaptive(policy, &input, phi, p.grid_size, seed)?;
            let mut table = Table::new(&["round", "control_phase", "outcome"]);
            for (m, (ph, u)) in run.record.phases.iter().zip(&run.record.outcomes).enumerate() {
                table.push(vec![(m + 1).to_string(), num(*ph), u.to_string()]);
            }
            let result = json!({
                "seed": seed,
                "policy": policy,
                "phi_true": phi,
                "record": run.record,
                "estimate": run.estimate,
                "sharpness": run.sharpness,
                "holevo_variance": run.holevo_variance,
            });
            Ok(Artifacts { result, table })
        }
        MziTask::Sweep { policy, runs } => sweep(policy, &input, p.grid_size, seed, *runs),
        MziTask::Likelihood { control_phase } => {
            let rows = likelihood_table(&input, *control_phase, p.grid_size)?;
            let mut table = Table::new(&["phi", "p0", "p1"]);
            for (phi, p0, p1) in &rows {
                table.push(vec![num(*phi), num(*p0), num(*p1)]);
            }
            let result = json!({ "photons": p.photons, "control_phase": control_phase, "grid_size": p.grid_size });
            Ok(Artifacts { result, table })
        }
        MziTask::Pso { config } => {
            let cfg = metrokit::mzi::PsoConfig { seed, ..*config };
            let res = pso_offline(&input, &cfg)?;
            let mut table = Table::new(&["round", "best_value"]);
            for (i, v) in res.history.iter().enumerate() {
                table.push(vec![(i + 1).to_string(), num(*v)]);
            }
            let result = json!({
                "seed": seed,
                "policy": Policy::Offline(res.policy),
                "best_value": res.best_value,
                "initial_mean": res.initial_mean,
                "history": res.history,
            });
            Ok(Artifacts { result, table })
        }
    }
}

fn sweep(
    policy: &Policy,
    input: &TwoModeFockState,
    grid: usize,
    seed: u64,
    runs: usize,
) -> Result<Artifacts, CliError> {
    let out = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            let phi = true_phase(s);
            simulate_adaptive(policy, input, phi, grid, s).map(|r| (s, phi, r.estimate, r.holevo_variance))
        })
        .collect::<metrokit::Result<Vec<_>>>()?;
    let mut table = Table::new(&["seed", "phi_true", "estimate", "holevo_variance"]);
    for (s, phi, est, v) in &out {
        table.push(vec![s.to_string(), num(*phi), num(*est), num(*v)]);
    }
    let mut vs: Vec<f64> = out.iter().map(|r| r.3).collect();
    vs.sort_by(|a, b| a.total_cmp(b));
    let median = if runs % 2 == 1 { vs[runs / 2] } else { 0.5 * (vs[runs / 2 - 1] + vs[runs / 2]) };
    let finite: Vec<f64> = vs.iter().copied().filter(|v| v.is_finite()).collect();
    let result = json!({
        "seed": seed,
        "policy": policy,
        "runs": runs,
        "median_holevo_variance": median,
        "finite_runs": finite.len(),
        "mean_holevo_variance": finite.iter().sum::<f64>() / finite.len().max(1) as f64,
    });
    Ok(Artifacts { result, table })
}

fn state_opt(p: &StateOptParams) -> Result<Artifacts, CliError> {
    let model = p.build()?;
    let mut table = Table::new(&["iter", "f_best", "f_worst", "spread"]);
    let opt = optimize_dicke(&model, p.t, &p.config, |r| {
        table.push(vec![r.iter.to_string(), num(r.f_best), num(r.f_worst), num(r.spread)]);
    })?;
    let result = json!({
        "spins": p.spins,
        "t": p.t,
        "coeffs": complex_list(&opt.coeffs),
        "objective": opt.value,
        "qfi": opt.qfi,
        "iterations": opt.iterations,
        "converged": opt.converged,
    });
    Ok(Artifacts { result, table })
}
