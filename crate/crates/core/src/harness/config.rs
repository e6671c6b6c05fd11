//! Strict JSON experiment configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::{CouplingSign, ModelKind, SpinModel};
use crate::vqt::{AnsatzSpec, ChannelSpec, EntropyMethod, InitialUnitary, TrainConfig, UnitaryTerm};

/// Largest register any experiment may allocate unless overridden by the environment.
pub const DEFAULT_MAX_QUBITS: usize = 12;
pub const MAX_QUBITS_ENV: &str = "THERMALIZER_MAX_QUBITS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Gibbs,
    Train,
    SweepBeta,
    EntropyBench,
    GradVariance,
    DepthStudy,
    SymmetryCheck,
    QoftBench,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Gibbs,
        Experiment::Train,
        Experiment::SweepBeta,
        Experiment::EntropyBench,
        Experiment::GradVariance,
        Experiment::DepthStudy,
        Experiment::SymmetryCheck,
        Experiment::QoftBench,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Gibbs => "gibbs",
            Experiment::Train => "train",
            Experiment::SweepBeta => "sweep-beta",
            Experiment::EntropyBench => "entropy-bench",
            Experiment::GradVariance => "grad-variance",
            Experiment::DepthStudy => "depth-study",
            Experiment::SymmetryCheck => "symmetry-check",
            Experiment::QoftBench => "qoft-bench",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n: usize,
    pub j: f64,
    pub g: f64,
    pub delta: f64,
    pub sign: CouplingSign,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { kind: ModelKind::Tfim, n: 6, j: 1.0, g: 1.0, delta: 0.0, sign: CouplingSign::Negative }
    }
}

impl ModelConfig {
    pub fn spin_model(&self) -> SpinModel {
        SpinModel { kind: self.kind, n: self.n, j: self.j, g: self.g, delta: self.delta, sign: self.sign }
    }
}

/// Ansatz fields; the register size and problem Hamiltonian come from the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzConfig {
    pub layers: usize,
    /// Unitary terms of each layer; mixing then problem Hamiltonian when absent.
    pub terms: Option<Vec<UnitaryTerm>>,
    pub channels: Vec<ChannelSpec>,
    pub initial: InitialUnitary,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self { layers: 3, terms: None, channels: Vec::new(), initial: InitialUnitary::Hadamard }
    }
}

impl AnsatzConfig {
    pub fn spec(&self, model: &SpinModel) -> AnsatzSpec {
        let mut spec = AnsatzSpec::alternating(model, self.layers, self.channels.clone());
        if let Some(terms) = &self.terms {
            spec.terms = terms.clone();
        }
        spec.initial = self.initial;
        spec
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyBenchConfig {
    pub n: usize,
    pub n_a: Vec<usize>,
    pub lambda: f64,
    pub m: usize,
}

impl Default for EntropyBenchConfig {
    fn default() -> Self {
        Self { n: 10, n_a: (3..=8).collect(), lambda: 0.05, m: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradVarianceConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub layers: usize,
    pub samples: usize,
    /// Pauli label padded with identities to the register size.
    pub observable: String,
}

impl Default for GradVarianceConfig {
    fn default() -> Self {
        Self { n_min: 4, n_max: 10, layers: 40, samples: 100, observable: "ZZ".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DepthStudyConfig {
    pub depths: Vec<usize>,
}

impl Default for DepthStudyConfig {
    fn default() -> Self {
        Self { depths: (1..=5).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryCase {
    /// Bitflip on one qubit under `{1, X}`.
    Bitflip,
    /// Phaseflip on one qubit under `{1, X}`.
    Phaseflip,
    /// `{Z11, ZZZ}` Kraus pair under `{111, XXX, X11, 1XX}`.
    ZPair,
    /// Two-site Heisenberg jumps under `{11, XX}`.
    HeisenbergPair,
    /// Single-site heating jump under `{1, X}`.
    TfimJump,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymmetryCheckConfig {
    pub cases: Vec<SymmetryCase>,
    /// Flip probability, or first jump rate.
    pub p: f64,
    /// Second jump rate.
    pub q: f64,
    pub tolerance: f64,
}

impl Default for SymmetryCheckConfig {
    fn default() -> Self {
        Self {
            cases: vec![SymmetryCase::Bitflip, SymmetryCase::Phaseflip, SymmetryCase::ZPair, SymmetryCase::HeisenbergPair],
            p: 0.3,
            q: 0.4,
            tolerance: crate::symmetry::SYMMETRY_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QoftBenchConfig {
    pub qubits: usize,
    /// Random `(H, A)` pairs per seed.
    pub pairs: usize,
    /// Target value of `beta ||H||`.
    pub beta_h_norm: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub quadrature_nodes: usize,
}

impl Default for QoftBenchConfig {
    fn default() -> Self {
        Self {
            qubits: 2,
            pairs: 20,
            beta_h_norm: 0.05,
            omega_min: -5.0,
            omega_max: 5.0,
            points: 101,
            quadrature_nodes: crate::qoft::QUADRATURE_NODES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Must agree with the command line when given.
    pub experiment: Option<Experiment>,
    pub model: ModelConfig,
    pub beta_grid: Vec<f64>,
    pub ansatz: AnsatzConfig,
    pub training: TrainConfig,
    pub seeds: Vec<u64>,
    pub output_path: String,
    pub entropy_bench: EntropyBenchConfig,
    pub grad_variance: GradVarianceConfig,
    pub depth_study: DepthStudyConfig,
    pub symmetry_check: SymmetryCheckConfig,
    pub qoft_bench: QoftBenchConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            model: ModelConfig::default(),
            beta_grid: vec![1.0],
            ansatz: AnsatzConfig::default(),
            training: TrainConfig::default(),
            seeds: vec![0],
            output_path: "results".into(),
            entropy_bench: EntropyBenchConfig::default(),
            grad_variance: GradVarianceConfig::default(),
            depth_study: DepthStudyConfig::default(),
            symmetry_check: SymmetryCheckConfig::default(),
            qoft_bench: QoftBenchConfig::default(),
        }
    }
}

/// Qubit limit from the environment, falling back to [`DEFAULT_MAX_QUBITS`].
pub fn max_qubits() -> usize {
    std::env::var(MAX_QUBITS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_QUBITS)
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses and validates a config document; unknown keys are rejected.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(raw).map_err(|e| schema(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    /// Every register size the config may allocate, with the field that sets it.
    pub fn register_sizes(&self) -> Vec<(&'static str, usize)> {
        let mut sizes = vec![
            ("model.n", self.model.n),
            ("entropy_bench.n", self.entropy_bench.n),
            ("grad_variance.n_max", self.grad_variance.n_max),
            ("qoft_bench.qubits", self.qoft_bench.qubits),
        ];
        if let EntropyMethod::ScaledSubsystem { n_a, n_b } = self.training.entropy {
            sizes.push(("training.entropy.n_a", n_a));
            sizes.push(("training.entropy.n_b", n_b));
        }
        sizes
    }

    /// Schema checks, then the resource guard.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(schema("seeds: at least one seed is required"));
        }
        if self.beta_grid.is_empty() {
            return Err(schema("beta_grid: at least one value is required"));
        }
        for (i, b) in self.beta_grid.iter().enumerate() {
            if !b.is_finite() || *b < 0.0 {
                return Err(schema(format!("beta_grid[{i}]: inverse temperature must be finite and >= 0, got {b}")));
            }
        }
        if self.ansatz.layers == 0 {
            return Err(schema("ansatz.layers: must be positive"));
        }
        if self.training.restarts == 0 {
            return Err(schema("training.restarts: must be positive"));
        }
        let eb = &self.entropy_bench;
        if eb.n_a.iter().any(|&k| k < 2 || k > eb.n) {
            return Err(schema(format!("entropy_bench.n_a: every size must lie in [2, {}]", eb.n)));
        }
        if !(0.0..=1.0).contains(&eb.lambda) {
            return Err(schema("entropy_bench.lambda: must lie in [0, 1]"));
        }
        let gv = &self.grad_variance;
        if gv.n_min < 2 || gv.n_min > gv.n_max {
            return Err(schema("grad_variance: need 2 <= n_min <= n_max"));
        }
        if gv.samples < 2 {
            return Err(schema("grad_variance.samples: need at least two"));
        }
        crate::qcore::PauliString::parse(&gv.observable)
            .map_err(|e| schema(format!("grad_variance.observable: {e}")))?;
        if self.depth_study.depths.is_empty() {
            return Err(schema("depth_study.depths: at least one depth is required"));
        }
        let sc = &self.symmetry_check;
        if !(sc.tolerance > 0.0) {
            return Err(schema("symmetry_check.tolerance: must be positive"));
        }
        let qb = &self.qoft_bench;
        if qb.qubits == 0 || qb.points == 0 || qb.pairs == 0 || qb.quadrature_nodes < 2 {
            return Err(schema("qoft_bench: qubits, pairs, points and quadrature_nodes must be positive"));
        }
        if !(qb.beta_h_norm > 0.0 && qb.beta_h_norm <= 0.1) {
            return Err(schema("qoft_bench.beta_h_norm: must lie in (0, 0.1]"));
        }
        if !(qb.omega_min <= qb.omega_max) {
            return Err(schema("qoft_bench: omega_min exceeds omega_max"));
        }
        self.model.spin_model().validate().map_err(|e| schema(format!("model: {e}")))?;
        let limit = max_qubits();
        for (_, size) in self.register_sizes() {
            if size > limit {
                return Err(Error::ResourceLimit { requested: size, limit });
            }
        }
        Ok(())
    }

    /// Reduced sizes for smoke runs.
    pub fn quick(mut self) -> Self {
        self.model.n = self.model.n.min(4);
        self.seeds.truncate(2);
        self.beta_grid.truncate(3);
        self.ansatz.layers = self.ansatz.layers.min(2);
        self.training.restarts = self.training.restarts.min(2);
        self.training.max_iters = self.training.max_iters.min(60);
        if let EntropyMethod::ScaledSubsystem { n_a, n_b } = &mut self.training.entropy {
            *n_a = (*n_a).min(self.model.n);
            *n_b = (*n_b).min(self.model.n);
        }
        let eb = &mut self.entropy_bench;
        eb.n = eb.n.min(6);
        eb.n_a.retain(|&k| k < eb.n);
        if eb.n_a.is_empty() {
            eb.n_a = (2..eb.n).collect();
        }
        eb.m = eb.m.min(5);
        let gv = &mut self.grad_variance;
        gv.n_max = gv.n_max.min(6);
        gv.n_min = gv.n_min.min(gv.n_max);
        gv.layers = gv.layers.min(10);
        gv.samples = gv.samples.min(30);
        self.depth_study.depths.truncate(3);
        let qb = &mut self.qoft_bench;
        qb.pairs = qb.pairs.min(3);
        qb.points = qb.points.min(21);
        self
    }

    pub fn with_seed_override(mut self, seed: u64) -> Self {
        self.seeds = vec![seed];
        self
    }

    /// Canonical JSON with sorted keys.
    pub fn canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string(&value)?)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON.
    pub fn config_hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.canonical_json()?.as_bytes());
        Ok(hex::encode(digest)[..16].to_string())
    }
}
