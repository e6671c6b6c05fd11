//! Entropy estimators: exact, rescaled small instance, analytic depolarizing form and a
//! disentangling upper bound, plus the random-circuit error model.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qcore::{
    partial_trace_matrix, spectrum_entropy, hermitian_eigenvalues, von_neumann_entropy, DensityMatrix,
    HermitianEigen, Matrix, C64,
};
use crate::vqt::ansatz::{term_generator, AnsatzSpec, CompiledAnsatz, ParameterVector};
use crate::vqt::optim::{minimize_bfgs, OptimizerOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Exact,
    ScaledSubsystem,
    AnalyticDepolarizing,
    VariationalBound,
}

impl EstimateMethod {
    pub fn name(self) -> &'static str {
        match self {
            EstimateMethod::Exact => "exact",
            EstimateMethod::ScaledSubsystem => "scaled_subsystem",
            EstimateMethod::AnalyticDepolarizing => "analytic_depolarizing",
            EstimateMethod::VariationalBound => "variational_bound",
        }
    }
}

/// An entropy value in nats with the method that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    pub n: usize,
    /// Size of the instance actually simulated for the scaled method.
    pub n_a: Option<usize>,
    pub evaluations: Option<usize>,
    pub warning: Option<String>,
}

impl EntropyEstimate {
    fn plain(value: f64, method: EstimateMethod, n: usize) -> Self {
        Self { value, method, n, n_a: None, evaluations: None, warning: None }
    }

    pub fn bits(&self) -> f64 {
        self.value / std::f64::consts::LN_2
    }
}

pub fn exact_entropy(rho: &DensityMatrix) -> EntropyEstimate {
    EntropyEstimate::plain(von_neumann_entropy(rho), EstimateMethod::Exact, rho.n_qubits())
}

/// `(n / n_a) S(A_{n_a})` with the same parameters on an `n_a`-site instance.
pub fn scaled_subsystem_entropy(spec: &AnsatzSpec, params: &ParameterVector, n_a: usize) -> Result<EntropyEstimate> {
    check_scaled(spec, n_a)?;
    let small = spec.resized(n_a).compile()?;
    scaled_from_compiled(&small, params, spec.n)
}

pub(crate) fn check_scaled(spec: &AnsatzSpec, n_a: usize) -> Result<()> {
    if !spec.size_parametric() {
        return Err(Error::Unsupported("scaled entropy needs a size-parametric ansatz".into()));
    }
    if n_a < 2 || n_a > spec.n {
        return invalid(format!("subsystem size must satisfy 2 <= n_a <= {}, got {n_a}", spec.n));
    }
    Ok(())
}

/// Scaled estimate from an already compiled small instance.
pub fn scaled_from_compiled(small: &CompiledAnsatz, params: &ParameterVector, n: usize) -> Result<EntropyEstimate> {
    let n_a = small.spec().n;
    let s_a = von_neumann_entropy(&small.evaluate(params)?);
    Ok(EntropyEstimate {
        n_a: Some(n_a),
        ..EntropyEstimate::plain(n as f64 / n_a as f64 * s_a, EstimateMethod::ScaledSubsystem, n)
    })
}

/// Binary entropy of one depolarised qubit, `-(1-x) ln(1-x) - x ln x` with `x = Lambda / 2`.
fn half_lambda_entropy(big_lambda: f64) -> f64 {
    let x = big_lambda / 2.0;
    spectrum_entropy(&[1.0 - x, x])
}

/// `n` times the entropy of one qubit after `m` depolarizing layers of strength `lambda`.
pub fn analytic_depolarizing_entropy(lambda: f64, m: usize, n: usize) -> Result<EntropyEstimate> {
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("lambda must lie in [0, 1], got {lambda}"));
    }
    let big = crate::channels::composed_depolarizing_strength(lambda, m);
    Ok(EntropyEstimate::plain(n as f64 * half_lambda_entropy(big), EstimateMethod::AnalyticDepolarizing, n))
}

/// Entropy of `alpha |psi><psi| + (1 - alpha) I / 2^n`.
pub fn model_state_entropy(alpha: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return invalid(format!("alpha must lie in [0, 1], got {alpha}"));
    }
    let d = 2f64.powi(n as i32);
    let floor = (1.0 - alpha) / d;
    let top = alpha + floor;
    let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    Ok(-xlogx(top) - (d - 1.0) * xlogx(floor))
}

/// Parameters of the pure-plus-white-noise description of a noisy random circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyErrorModel {
    pub n: usize,
    pub n_a: usize,
    pub lambda: f64,
    pub m: usize,
}

impl EntropyErrorModel {
    pub fn new(n: usize, n_a: usize, lambda: f64, m: usize) -> Result<Self> {
        if n_a > n || n_a == 0 {
            return invalid(format!("need 1 <= n_a <= n, got n_a={n_a}, n={n}"));
        }
        if !(lambda >= 0.0) {
            return invalid("error rate must be non-negative");
        }
        Ok(Self { n, n_a, lambda, m })
    }

    /// `exp(-lambda n m)`.
    pub fn alpha(&self) -> f64 {
        (-self.lambda * self.n as f64 * self.m as f64).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredictedError {
    pub absolute: f64,
    pub relative: f64,
}

/// `relative ~ exp(-n_a lambda m)` and `absolute ~ relative * n ln 2`.
pub fn entropy_error_model(model: &EntropyErrorModel) -> PredictedError {
    let relative = (-(model.n_a as f64) * model.lambda * model.m as f64).exp();
    PredictedError { absolute: relative * model.n as f64 * std::f64::consts::LN_2, relative }
}

/// `(1 - |s_a - s_b|) (beta E - s_a)`.
pub fn regularized_cost(energy: f64, s_a: f64, s_b: f64, beta: f64) -> f64 {
    (1.0 - (s_a - s_b).abs()) * (beta * energy - s_a)
}

/// A product of `exp(-i phi_k G_k)` gates, applied in list order.
#[derive(Clone, Debug)]
pub struct Disentangler {
    gates: Vec<HermitianEigen>,
    initial: Vec<f64>,
}

impl Disentangler {
    pub fn new(generators: Vec<Matrix>, initial: Vec<f64>) -> Result<Self> {
        if generators.len() != initial.len() {
            return invalid("one initial angle per disentangler gate required");
        }
        let gates = generators.iter().map(HermitianEigen::new).collect::<Result<_>>()?;
        Ok(Self { gates, initial })
    }

    /// Inverse of the unitary part of the last `depth` layers of an ansatz, with matching
    /// initial angles. `None` inverts every layer.
    pub fn inverse_of(spec: &AnsatzSpec, params: &ParameterVector, depth: Option<usize>) -> Result<Self> {
        spec.check_parameters(params)?;
        let depth = depth.unwrap_or(spec.layers).min(spec.layers);
        let nt = spec.terms.len();
        let mut generators = Vec::new();
        let mut initial = Vec::new();
        for j in (spec.layers - depth..spec.layers).rev() {
            for (k, term) in spec.terms.iter().enumerate() {
                generators.push(term_generator(*term, spec.n, spec.model.as_ref())?);
                initial.push(-params.theta[j * nt + k]);
            }
        }
        Self::new(generators, initial)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn initial_angles(&self) -> &[f64] {
        &self.initial
    }

    pub fn apply(&self, rho: &Matrix, angles: &[f64]) -> Matrix {
        let mut m = rho.clone();
        for (eig, &phi) in self.gates.iter().zip(angles) {
            let u = eig.map(|e| C64::from_polar(1.0, -e * phi));
            m = &u * m * u.adjoint();
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalOptions {
    pub max_evaluations: usize,
    pub ftol: f64,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self { max_evaluations: 2000, ftol: 1e-10 }
    }
}

fn check_partition(partition: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for part in partition {
        for &s in part {
            if s >= n || seen[s] {
                return invalid(format!("partition must cover sites 0..{n} disjointly"));
            }
            seen[s] = true;
        }
    }
    if seen.iter().any(|x| !x) {
        return invalid(format!("partition must cover sites 0..{n} disjointly"));
    }
    Ok(())
}

fn product_entropy(m: &Matrix, n: usize, partition: &[Vec<usize>]) -> f64 {
    partition
        .iter()
        .map(|part| {
            partial_trace_matrix(m, n, part)
                .and_then(|r| hermitian_eigenvalues(&r))
                .map(|vals| spectrum_entropy(&vals))
                .unwrap_or(f64::INFINITY)
        })
        .sum()
}

/// `min_phi sum_j S(Tr_{not j} U_phi rho U_phi^dagger)`, an upper bound on `S(rho)` by subadditivity.
pub fn variational_entropy_bound(
    rho: &DensityMatrix,
    partition: &[Vec<usize>],
    disentangler: &Disentangler,
    options: &VariationalOptions,
) -> Result<EntropyEstimate> {
    let n = rho.n_qubits();
    check_partition(partition, n)?;
    let objective = |phi: &[f64]| product_entropy(&disentangler.apply(rho.matrix(), phi), n, partition);
    let start = objective(disentangler.initial_angles());
    let opts = OptimizerOptions {
        max_evaluations: Some(options.max_evaluations),
        ftol: options.ftol,
        max_iters: usize::MAX,
        ..OptimizerOptions::default()
    };
    let out = minimize_bfgs(objective, disentangler.initial_angles(), &opts);
    let value = out.value.min(start);
    Ok(EntropyEstimate {
        evaluations: Some(out.evaluations),
        warning: (!out.converged).then(|| "optimizer budget exhausted; best bound returned".to_string()),
        ..EntropyEstimate::plain(value, EstimateMethod::VariationalBound, n)
    })
}
