use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ansatz::{AnsatzSpec, ParameterVector};
use super::cost::{CostFunction, EntropyMethod};
use super::optim::{minimize, OptimizerKind, OptimizerOptions};
use crate::error::{invalid, Result};
use crate::models::gibbs_state;
use crate::qcore::{uhlmann_fidelity, DensityMatrix, Matrix};

/// Registers above this size skip the fidelity report.
const FIDELITY_MAX_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub restarts: usize,
    pub max_iters: usize,
    pub ftol: f64,
    pub seed: u64,
    /// Standard deviation of the initial angles.
    pub init_sigma: f64,
    pub entropy: EntropyMethod,
    pub regularize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Bfgs,
            restarts: 5,
            max_iters: 500,
            ftol: 1e-8,
            seed: 0,
            init_sigma: 0.1,
            entropy: EntropyMethod::Exact,
            regularize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainingResult {
    pub best_params: ParameterVector,
    pub final_cost: f64,
    /// Cost after each iteration of the best restart.
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Fidelity with the Gibbs state of `h` at `beta`.
    pub final_fidelity: Option<f64>,
    pub seed: u64,
    pub best_restart: usize,
    pub restart_costs: Vec<f64>,
    pub restart_fidelities: Vec<Option<f64>>,
}

/// Maps unconstrained optimiser coordinates to parameters.
///
/// Angles pass through; a channel parameter in `[lo, hi]` is `lo + (hi - lo) sin^2(u)`,
/// which reaches both bounds.
#[derive(Clone, Debug)]
pub struct ParameterMap {
    n_theta: usize,
    bounds: Vec<(f64, f64)>,
}

impl ParameterMap {
    pub fn new(spec: &AnsatzSpec) -> Self {
        Self { n_theta: spec.theta_count(), bounds: spec.lambda_bounds() }
    }

    pub fn dim(&self) -> usize {
        self.n_theta + self.bounds.len()
    }

    pub fn to_params(&self, x: &[f64]) -> ParameterVector {
        ParameterVector {
            theta: x[..self.n_theta].to_vec(),
            lambda: x[self.n_theta..]
                .iter()
                .zip(&self.bounds)
                .map(|(u, (lo, hi))| lo + (hi - lo) * u.sin().powi(2))
                .collect(),
        }
    }

    pub fn from_params(&self, p: &ParameterVector) -> Vec<f64> {
        let mut x = p.theta.clone();
        x.extend(p.lambda.iter().zip(&self.bounds).map(|(v, (lo, hi))| {
            let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
            t.sqrt().asin()
        }));
        x
    }
}

/// Initial points of every restart: Gaussian angles, channel parameters at mid-bound.
pub fn initial_points(spec: &AnsatzSpec, restarts: usize, sigma: f64, seed: u64) -> Result<Vec<ParameterVector>> {
    let normal = Normal::new(0.0, sigma).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..restarts)
        .map(|_| ParameterVector {
            theta: (0..spec.theta_count()).map(|_| normal.sample(&mut rng)).collect(),
            lambda: spec.default_parameters().lambda,
        })
        .collect())
}

/// Best-of-restarts minimisation of the cost; deterministic in `config.seed`.
pub fn train(spec: &AnsatzSpec, h: &Matrix, beta: f64, config: &TrainConfig) -> Result<TrainingResult> {
    let target = if spec.n <= FIDELITY_MAX_QUBITS { Some(gibbs_state(h, beta)?.state) } else { None };
    train_with_target(spec, h, beta, config, target.as_ref())
}

pub fn train_with_target(
    spec: &AnsatzSpec,
    h: &Matrix,
    beta: f64,
    config: &TrainConfig,
    target: Option<&DensityMatrix>,
) -> Result<TrainingResult> {
    if config.restarts == 0 {
        return invalid("at least one restart is required");
    }
    if !(config.ftol > 0.0) || !(config.init_sigma >= 0.0) {
        return invalid("ftol must be positive and init_sigma non-negative");
    }
    let cost = CostFunction::new(spec, h, beta, &config.entropy, config.regularize)?;
    let map = ParameterMap::new(spec);
    let starts = initial_points(spec, config.restarts, config.init_sigma.max(1e-300), config.seed)?;
    // surfaces evaluation errors before the optimiser hides them behind infinities
    cost.evaluate(&starts[0])?;
    let opts = OptimizerOptions { max_iters: config.max_iters, ftol: config.ftol, ..Default::default() };
    let outcomes: Vec<_> = starts
        .par_iter()
        .map(|p0| {
            let objective = |x: &[f64]| cost.evaluate(&map.to_params(x)).map(|b| b.cost).unwrap_or(f64::INFINITY);
            minimize(config.optimizer, objective, &map.from_params(p0), &opts)
        })
        .collect();
    let fidelity_of = |x: &[f64]| -> Result<Option<f64>> {
        match target {
            Some(t) => Ok(Some(uhlmann_fidelity(&cost.compiled().evaluate(&map.to_params(x))?, t)?)),
            None => Ok(None),
        }
    };
    let restart_fidelities = outcomes.iter().map(|o| fidelity_of(&o.x)).collect::<Result<Vec<_>>>()?;
    let best = (0..outcomes.len())
        .min_by(|&a, &b| outcomes[a].value.total_cmp(&outcomes[b].value))
        .expect("at least one restart");
    let out = &outcomes[best];
    Ok(TrainingResult {
        best_params: map.to_params(&out.x),
        final_cost: out.value,
        cost_trace: out.trace.clone(),
        iterations: out.iterations,
        converged: out.converged,
        final_fidelity: restart_fidelities[best],
        seed: config.seed,
        best_restart: best,
        restart_costs: outcomes.iter().map(|o| o.value).collect(),
        restart_fidelities,
    })
}
