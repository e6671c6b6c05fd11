use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ansatz::AnsatzSpec;
use super::train::{train, TrainConfig};
use crate::error::{invalid, Result};
use crate::models::gibbs_state;
use crate::qcore::{uhlmann_fidelity, DensityMatrix, Matrix, Pauli, PauliString, Vector};

const FD_STEP: f64 = 1e-4;

/// Pads a Pauli string with identities up to `n` sites.
pub fn padded_observable(obs: &PauliString, n: usize) -> Result<PauliString> {
    if obs.num_qubits() > n {
        return invalid(format!("observable on {} sites does not fit {n}", obs.num_qubits()));
    }
    let mut ops = obs.ops.clone();
    ops.resize(n, Pauli::I);
    Ok(PauliString { ops, coefficient: obs.coefficient })
}

fn expectation_pure(psi: &Vector, obs: &Matrix) -> f64 {
    (psi.adjoint() * obs * psi)[(0, 0)].re
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientVarianceRow {
    pub n: usize,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the variance estimate under a normal approximation.
    pub variance_std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientVarianceTable {
    pub rows: Vec<GradientVarianceRow>,
    /// Least-squares slope of `ln variance` against `n`; `None` if a variance is zero.
    pub log_slope: Option<f64>,
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Sample variance of `d<O>/d theta_k` with angles uniform in `[0, 2 pi)`, channels off.
pub fn gradient_variance_study(
    family: &AnsatzSpec,
    observable: &PauliString,
    n_range: &[usize],
    samples: usize,
    param_index: usize,
    seed: u64,
) -> Result<GradientVarianceTable> {
    if samples < 2 {
        return invalid("at least two samples are needed for a variance");
    }
    let mut rows = Vec::with_capacity(n_range.len());
    for &n in n_range {
        let spec = family.resized(n);
        if param_index >= spec.theta_count() {
            return invalid(format!("parameter {param_index} outside {} angles", spec.theta_count()));
        }
        let compiled = spec.compile()?;
        let obs = padded_observable(observable, n)?.to_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut grads = Vec::with_capacity(samples);
        for _ in 0..samples {
            let mut theta: Vec<f64> = (0..spec.theta_count()).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
            let base = theta[param_index];
            theta[param_index] = base + FD_STEP;
            let up = expectation_pure(&compiled.evaluate_unitary_state(&theta)?, &obs);
            theta[param_index] = base - FD_STEP;
            let down = expectation_pure(&compiled.evaluate_unitary_state(&theta)?, &obs);
            grads.push((up - down) / (2.0 * FD_STEP));
        }
        let k = samples as f64;
        let mean = grads.iter().sum::<f64>() / k;
        let variance = grads.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (k - 1.0);
        rows.push(GradientVarianceRow {
            n,
            samples,
            mean,
            variance,
            variance_std_error: variance * (2.0 / (k - 1.0)).sqrt(),
        });
    }
    let log_slope = if rows.len() >= 2 && rows.iter().all(|r| r.variance > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.variance.ln()).collect();
        Some(linear_slope(&x, &y))
    } else {
        None
    };
    Ok(GradientVarianceTable { rows, log_slope })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthRow {
    pub m: usize,
    pub fidelity: f64,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Best fidelity and iteration count of training at each depth.
pub fn depth_dependence_study(
    family: &AnsatzSpec,
    h: &Matrix,
    beta: f64,
    m_range: &[usize],
    config: &TrainConfig,
) -> Result<Vec<DepthRow>> {
    let target = gibbs_state(h, beta)?.state;
    m_range
        .iter()
        .map(|&m| {
            let spec = AnsatzSpec { layers: m, ..family.clone() };
            if m == 0 {
                let rho: DensityMatrix = spec.compile()?.evaluate(&spec.default_parameters())?;
                return Ok(DepthRow {
                    m,
                    fidelity: uhlmann_fidelity(&rho, &target)?,
                    cost: f64::NAN,
                    iterations: 0,
                    converged: true,
                });
            }
            let result = train(&spec, h, beta, config)?;
            Ok(DepthRow {
                m,
                fidelity: result.final_fidelity.unwrap_or(f64::NAN),
                cost: result.final_cost,
                iterations: result.iterations,
                converged: result.converged,
            })
        })
        .collect()
}
