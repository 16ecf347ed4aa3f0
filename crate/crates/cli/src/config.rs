// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: `{"command", "parameters", "seed", "output_dir"}`
//! with a typed parameter schema per command.

use std::path::{Path, PathBuf};

use metrokit::channel::EncodedChannel;
use metrokit::control::{ControlField, GrapeConfig};
use metrokit::linalg::{c, CMat, CVec};
use metrokit::mzi::{Policy, PsoConfig, TwoModeFockState, GRID_SIZE};
use metrokit::qcore::{DensityMatrix, MatrixJson, PureState};
use metrokit::qec::{CodePair, PrimalNorm};
use metrokit::stateopt::{DephasingKind, NelderMeadConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Qfi,
    ChannelFidelity,
    OptimalProbe,
    Grape,
    QecCode,
    AdaptiveMzi,
    StateOpt,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Qfi => "qfi",
            Command::ChannelFidelity => "channel-fidelity",
            Command::OptimalProbe => "optimal-probe",
            Command::Grape => "grape",
            Command::QecCode => "qec-code",
            Command::AdaptiveMzi => "adaptive-mzi",
            Command::StateOpt => "state-opt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "empty_object")]
    pub parameters: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    /// Canonical serialization used for the config hash: object keys are
    /// sorted and the output directory, which does not affect results, is
    /// left out.
    pub fn canonical_json(&self) -> String {
        let hashed = RunConfig { output_dir: None, ..self.clone() };
        serde_json::to_string(&hashed).expect("config serializes")
    }

    /// Parses and validates the command parameters.
    pub fn resolve(&self) -> Result<Job, CliError> {
        let p = self.parameters.clone();
        let job = match self.command {
            Command::Qfi => Job::Qfi(parse(p)?),
            Command::ChannelFidelity => Job::ChannelFidelity(parse(p)?),
            Command::OptimalProbe => Job::OptimalProbe(parse(p)?),
            Command::Grape => Job::Grape(parse(p)?),
            Command::QecCode => Job::QecCode(parse(p)?),
            Command::AdaptiveMzi => Job::AdaptiveMzi(parse(p)?),
            Command::StateOpt => Job::StateOpt(parse(p)?),
        };
        job.validate()?;
        Ok(job)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Schema(format!("parameters: {e}")))
}

pub(crate) fn schema<T>(what: &str, r: metrokit::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Schema(format!("{what}: {e}")))
}

fn matrix(what: &str, m: &MatrixJson) -> Result<CMat, CliError> {
    schema(what, m.to_matrix())
}

fn matrices(what: &str, ms: &[MatrixJson]) -> Result<Vec<CMat>, CliError> {
    ms.iter().enumerate().map(|(i, m)| matrix(&format!("{what}[{i}]"), m)).collect()
}

fn state(what: &str, m: &MatrixJson) -> Result<DensityMatrix, CliError> {
    schema(what, DensityMatrix::new(matrix(what, m)?))
}

fn finite(what: &str, values: &[f64]) -> Result<(), CliError> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(CliError::Schema(format!("{what}: {v} is not finite"))),
        None => Ok(()),
    }
}

/// Validated command with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Job {
    Qfi(QfiParams),
    ChannelFidelity(ChannelFidelityParams),
    OptimalProbe(OptimalProbeParams),
    Grape(GrapeParams),
    QecCode(QecParams),
    AdaptiveMzi(AdaptiveMziParams),
    StateOpt(StateOptParams),
}

impl Job {
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Job::Qfi(p) => p.source.build().map(|_| ()),
            Job::ChannelFidelity(p) => {
                finite("x1, x2", &[p.x1, p.x2])?;
                p.channel.build().map(|_| ())
            }
            Job::OptimalProbe(p) => p.build().map(|_| ()),
            Job::Grape(p) => p.build().map(|_| ()),
            Job::QecCode(p) => p.build().map(|_| ()),
            Job::AdaptiveMzi(p) => p.build().map(|_| ()),
            Job::StateOpt(p) => p.build().map(|_| ()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// `{sqrt(p) e^{-ix sz}, sqrt(1-p) sz e^{-ix sz}}`.
    Dephasing {
        p: f64,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    Unitary {
        generator: MatrixJson,
    },
    /// `K_j(x) = A_j exp(-i x H)` for square noise operators `A_j`.
    Encoded {
        noise: Vec<MatrixJson>,
        generator: MatrixJson,
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<EncodedChannel, CliError> {
        let ch = match self {
            ChannelSpec::Dephasing { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(CliError::Schema(format!("channel: p = {p} outside [0, 1]")));
                }
                EncodedChannel::dephasing(*p)
            }
            ChannelSpec::AmplitudeDamping { gamma } => EncodedChannel::amplitude_damping(*gamma),
            ChannelSpec::Unitary { generator } => EncodedChannel::unitary(matrix("generator", generator)?),
            ChannelSpec::Encoded { noise, generator } => {
                EncodedChannel::new(matrices("noise", noise)?, matrix("generator", generator)?)
            }
        };
        schema("channel", ch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfiParams {
    pub source: QfiSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QfiSource {
    /// A state and its parameter derivative.
    State { rho: MatrixJson, drho: MatrixJson },
    /// The output family of a channel applied to a fixed input, which
    /// defaults to the uniform superposition.
    Channel {
        channel: ChannelSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input: Option<MatrixJson>,
        #[serde(default)]
        x: f64,
        #[serde(default = "default_bures_dx")]
        dx: f64,
    },
}

fn default_bures_dx() -> f64 {
    1e-3
}

pub enum QfiInput {
    State(DensityMatrix, CMat),
    Channel { channel: EncodedChannel, input: DensityMatrix, x: f64, dx: f64 },
}

impl QfiSource {
    pub fn build(&self) -> Result<QfiInput, CliError> {
        match self {
            QfiSource::State { rho, drho } => {
                let rho = state("rho", rho)?;
                let drho = matrix("drho", drho)?;
                if drho.shape() != (rho.dim(), rho.dim()) {
                    return Err(CliError::Schema(format!("drho must be {0}x{0}", rho.dim())));
                }
                Ok(QfiInput::State(rho, drho))
            }
            QfiSource::Channel { channel, input, x, dx } => {
                finite("x", &[*x, *dx])?;
                if !(*dx > 0.0) {
                    return Err(CliError::Schema(format!("dx = {dx} must be positive")));
                }
                let channel = channel.build()?;
                let d = channel.generator().nrows();
                let input = match input {
                    Some(m) => state("input", m)?,
                    None => uniform_superposition(d),
                };
                if input.dim() != d {
                    return Err(CliError::Schema(format!("input must be {d}x{d}")));
                }
                Ok(QfiInput::Channel { channel, input, x: *x, dx: *dx })
            }
        }
    }
}

fn uniform_superposition(d: usize) -> DensityMatrix {
    PureState::normalized(CVec::from_element(d, c(1.0, 0.0))).expect("nonzero vector").density_matrix()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFidelityParams {
    pub channel: ChannelSpec,
    pub x1: f64,
    pub x2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalProbeParams {
    pub channel: ChannelSpec,
    #[serde(default)]
    pub x: f64,
    /// Defaults to the library step for `x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
}

impl OptimalProbeParams {
    pub fn build(&self) -> Result<(EncodedChannel, f64), CliError> {
        let dx = self.dx.unwrap_or_else(|| metrokit::channel::default_channel_dx(self.x));
        finite("x, dx", &[self.x, dx])?;
        if !(dx > 0.0) {
            return Err(CliError::Schema(format!("dx = {dx} must be positive")));
        }
        Ok((self.channel.build()?, dx))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    /// Parameter-independent part; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<MatrixJson>,
    pub generator: MatrixJson,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldInit {
    #[default]
    Zero,
    Constant {
        values: Vec<f64>,
    },
    /// Uniform amplitudes in `[-scale, scale]` drawn from the run seed.
    Random {
        scale: f64,
    },
    /// Amplitudes read from a control-field CSV file.
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrapeParams {
    pub drift: DriftSpec,
    pub x: f64,
    pub controls: Vec<MatrixJson>,
    #[serde(default)]
    pub noise: Vec<MatrixJson>,
    #[serde(default)]
    pub rates: Vec<f64>,
    pub total_time: f64,
    pub steps: usize,
    pub bounds: [f64; 2],
    pub input: MatrixJson,
    #[serde(default)]
    pub init: FieldInit,
    #[serde(default)]
    pub config: GrapeConfig,
}

pub struct GrapeSetup {
    pub problem: metrokit::control::ControlProblem,
    pub input: DensityMatrix,
    /// `None` for random initialization, which needs the seed.
    pub field: Option<ControlField>,
}

impl GrapeParams {
    pub fn build(&self) -> Result<GrapeSetup, CliError> {
        use metrokit::control::{ControlProblem, LinearDrift};
        use std::sync::Arc;
        let generator = matrix("drift.generator", &self.drift.generator)?;
        let base = match &self.drift.base {
            Some(b) => matrix("drift.base", b)?,
            None => CMat::zeros(generator.nrows(), generator.ncols()),
        };
        let drift = Arc::new(schema("drift", LinearDrift::new(base, generator))?);
        let problem = schema(
            "problem",
            ControlProblem::new(
                drift,
                self.x,
                matrices("controls", &self.controls)?,
                matrices("noise", &self.noise)?,
                self.rates.clone(),
                self.total_time,
                self.steps,
                (self.bounds[0], self.bounds[1]),
            ),
        )?;
        let input = state("input", &self.input)?;
        if input.dim() != problem.dim() {
            return Err(CliError::Schema(format!("input must be {0}x{0}", problem.dim())));
        }
        let cfg = &self.config;
        if cfg.iterations == 0 || !(cfg.learning_rate > 0.0) || !(cfg.min_learning_rate > 0.0) {
            return Err(CliError::Schema("grape config needs iterations >= 1 and positive rates".into()));
        }
        let field = match &self.init {
            FieldInit::Zero => Some(problem.zero_field()),
            FieldInit::Constant { values } => {
                finite("init.values", values)?;
                if values.len() != problem.num_controls() {
                    return Err(CliError::Schema(format!("init needs {} values", problem.num_controls())));
                }
                Some(ControlField::constant(problem.steps(), values))
            }
            FieldInit::Random { scale } => {
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(CliError::Schema(format!("init scale {scale} must be finite and nonnegative")));
                }
                None
            }
            FieldInit::Csv { path } => Some(read_field(path)?),
        };
        if let Some(f) = &field {
            if (f.steps(), f.num_controls()) != (problem.steps(), problem.num_controls()) {
                return Err(CliError::Schema(format!(
                    "initial field is {}x{}, expected {}x{}",
                    f.steps(),
                    f.num_controls(),
                    problem.steps(),
                    problem.num_controls()
                )));
            }
        }
        Ok(GrapeSetup { problem, input, field })
    }
}

fn read_field(path: &Path) -> Result<ControlField, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("control field {}: {e}", path.display())))?;
    schema("control field", ControlField::from_csv(&text))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QecParams {
    pub generator: MatrixJson,
    pub noise: Vec<MatrixJson>,
    /// Evolution time for the effective QFI.
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default)]
    pub norm: PrimalNorm,
    /// Code to verify instead of the one built from the orthogonal part of
    /// the generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<Value>,
}

fn one() -> f64 {
    1.0
}

pub struct QecSetup {
    pub generator: CMat,
    pub noise: Vec<CMat>,
    pub code: Option<CodePair>,
}

impl QecParams {
    pub fn build(&self) -> Result<QecSetup, CliError> {
        finite("t", &[self.t])?;
        let generator = matrix("generator", &self.generator)?;
        schema("generator", metrokit::linalg::ensure_hermitian(&generator, 1e-9))?;
        let noise = matrices("noise", &self.noise)?;
        if let Some(bad) = noise.iter().find(|n| n.shape() != generator.shape()) {
            return Err(CliError::Schema(format!("noise operator is {}x{}", bad.nrows(), bad.ncols())));
        }
        let code = match &self.code {
            Some(v) => {
                let code = schema("code", CodePair::from_json(&v.to_string()))?;
                if code.system_dim != generator.nrows() {
                    return Err(CliError::Schema(format!("code system dimension {} differs", code.system_dim)));
                }
                Some(code)
            }
            None => None,
        };
        Ok(QecSetup { generator, noise, code })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    #[default]
    BerryWiseman,
    /// `|k, N-k>` with `k` photons in the first mode.
    Fock { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum MziTask {
    /// One adaptive run; the true phase is drawn from the seed when absent.
    Run {
        policy: Policy,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi_true: Option<f64>,
    },
    /// Independent runs with seeds `seed, seed + 1, ...`.
    Sweep { policy: Policy, runs: usize },
    /// Outcome probabilities over the phase grid at a fixed control phase.
    Likelihood { control_phase: f64 },
    /// Particle swarm search for an offline rule; the run seed replaces
    /// `config.seed`.
    Pso {
        #[serde(default)]
        config: PsoConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveMziParams {
    pub photons: usize,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    pub task: MziTask,
}

fn default_grid() -> usize {
    GRID_SIZE
}

impl AdaptiveMziParams {
    pub fn build(&self) -> Result<TwoModeFockState, CliError> {
        if self.photons == 0 || self.photons > metrokit::mzi::MAX_EXACT_PHOTONS {
            return Err(CliError::Schema(format!("photons must be in 1..={}", metrokit::mzi::MAX_EXACT_PHOTONS)));
        }
        if self.grid_size == 0 {
            return Err(CliError::Schema("grid_size must be positive".into()));
        }
        let input = match self.input {
            InputSpec::BerryWiseman => TwoModeFockState::berry_wiseman(self.photons),
            InputSpec::Fock { k } => schema("input", TwoModeFockState::fock(k, self.photons))?,
        };
        let policy = match &self.task {
            MziTask::Run { policy, phi_true } => {
                finite("phi_true", &phi_true.iter().copied().collect::<Vec<_>>())?;
                Some(policy)
            }
            MziTask::Sweep { policy, runs } => {
                if *runs == 0 {
                    return Err(CliError::Schema("runs must be positive".into()));
                }
                Some(policy)
            }
            MziTask::Likelihood { control_phase } => {
                finite("control_phase", &[*control_phase])?;
                None
            }
            MziTask::Pso { config } => {
                schema("pso config", config.validate())?;
                None
            }
        };
        match policy {
            Some(Policy::Offline(off)) => {
                schema("policy", off.validate())?;
                if off.deltas.len() != self.photons {
                    return Err(CliError::Schema(format!("offline policy needs {} deltas", self.photons)));
                }
            }
            Some(Policy::Fixed { phi }) => finite("policy.phi", &[*phi])?,
            _ => {}
        }
        Ok(input)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateOptParams {
    pub spins: usize,
    #[serde(default = "one")]
    pub omega: f64,
    pub gamma: f64,
    pub dephasing: DephasingKind,
    pub t: f64,
    #[serde(default)]
    pub config: NelderMeadConfig,
}

impl StateOptParams {
    pub fn build(&self) -> Result<metrokit::stateopt::SpinModel, CliError> {
        use metrokit::stateopt::{berry_wiseman_state, SpinModel};
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(CliError::Schema(format!("t = {} must be positive", self.t)));
        }
        schema("config", self.config.validate())?;
        if self.spins == 0 {
            return Err(CliError::Schema("spins must be positive".into()));
        }
        let coeffs = berry_wiseman_state(self.spins).into_iter().map(|v| c(v, 0.0)).collect();
        schema("model", SpinModel::new(self.spins, self.omega, self.gamma, self.dephasing, coeffs))
    }
}
