use serde::{Deserialize, Serialize};

use super::ansatz::{AnsatzSpec, ChannelKind, CompiledAnsatz, ParameterVector, Sharing};
use crate::entropy::{
    analytic_depolarizing_entropy, check_scaled, regularized_cost, scaled_from_compiled, variational_entropy_bound,
    Disentangler, VariationalOptions,
};
use crate::error::{invalid, Error, Result};
use crate::qcore::{check_hermitian, expectation, von_neumann_entropy, Matrix};

/// How the entropy term of the cost is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum EntropyMethod {
    Exact,
    ScaledSubsystem {
        #[serde(default = "default_n_a")]
        n_a: usize,
        /// Second instance size, used only by the regularised cost.
        #[serde(default = "default_n_b")]
        n_b: usize,
    },
    AnalyticDepolarizing,
    VariationalBound {
        max_evaluations: usize,
        /// Number of trailing layers inverted by the disentangler; all by default.
        depth: Option<usize>,
    },
}

fn default_n_a() -> usize {
    3
}

fn default_n_b() -> usize {
    4
}

impl Default for EntropyMethod {
    fn default() -> Self {
        EntropyMethod::Exact
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub cost: f64,
    pub energy: f64,
    pub entropy: f64,
    /// Estimate from the second instance when regularising.
    pub entropy_b: Option<f64>,
}

/// `beta <H> - S`, or its regularised form, for a fixed ansatz and Hamiltonian.
#[derive(Clone, Debug)]
pub struct CostFunction {
    full: CompiledAnsatz,
    small_a: Option<CompiledAnsatz>,
    small_b: Option<CompiledAnsatz>,
    h: Matrix,
    beta: f64,
    method: EntropyMethod,
    regularize: bool,
}

impl CostFunction {
    pub fn new(spec: &AnsatzSpec, h: &Matrix, beta: f64, method: &EntropyMethod, regularize: bool) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return invalid(format!("beta must be finite and non-negative, got {beta}"));
        }
        check_hermitian(h, "Hamiltonian")?;
        if h.nrows() != 1 << spec.n {
            return Err(Error::DimensionMismatch { expected: 1 << spec.n, found: h.nrows() });
        }
        let mut small_a = None;
        let mut small_b = None;
        match method {
            EntropyMethod::ScaledSubsystem { n_a, n_b } => {
                check_scaled(spec, *n_a)?;
                small_a = Some(spec.resized(*n_a).compile()?);
                if regularize {
                    check_scaled(spec, *n_b)?;
                    small_b = Some(spec.resized(*n_b).compile()?);
                }
            }
            EntropyMethod::AnalyticDepolarizing => {
                let ok = spec.channels.len() == 1
                    && spec.channels[0].kind == ChannelKind::Depolarizing
                    && spec.channels[0].sharing == Sharing::Shared;
                if !ok {
                    return Err(Error::Unsupported(
                        "the analytic estimate needs exactly one shared depolarizing channel".into(),
                    ));
                }
            }
            EntropyMethod::Exact | EntropyMethod::VariationalBound { .. } => {}
        }
        if regularize && small_b.is_none() {
            return Err(Error::Unsupported("regularisation needs the scaled subsystem method".into()));
        }
        Ok(Self {
            full: spec.compile()?,
            small_a,
            small_b,
            h: h.clone(),
            beta,
            method: method.clone(),
            regularize,
        })
    }

    pub fn spec(&self) -> &AnsatzSpec {
        self.full.spec()
    }

    pub fn compiled(&self) -> &CompiledAnsatz {
        &self.full
    }

    pub fn evaluate(&self, params: &ParameterVector) -> Result<CostBreakdown> {
        let rho = self.full.evaluate(params)?;
        let energy = expectation(&rho, &self.h)?;
        let n = self.spec().n;
        let (entropy, entropy_b) = match &self.method {
            EntropyMethod::Exact => (von_neumann_entropy(&rho), None),
            EntropyMethod::ScaledSubsystem { .. } => {
                let a = scaled_from_compiled(self.small_a.as_ref().expect("compiled"), params, n)?.value;
                let b = match &self.small_b {
                    Some(small) => Some(scaled_from_compiled(small, params, n)?.value),
                    None => None,
                };
                (a, b)
            }
            EntropyMethod::AnalyticDepolarizing => {
                let bounds = self.spec().lambda_bounds();
                let survive: f64 = params
                    .lambda
                    .iter()
                    .zip(&bounds)
                    .map(|(x, (lo, hi))| 1.0 - x.clamp(*lo, *hi))
                    .product();
                // equivalent single-layer strength of the whole stack
                (analytic_depolarizing_entropy(1.0 - survive, 1, n)?.value, None)
            }
            EntropyMethod::VariationalBound { max_evaluations, depth } => {
                let dis = Disentangler::inverse_of(self.spec(), params, *depth)?;
                let singles: Vec<Vec<usize>> = (0..n).map(|s| vec![s]).collect();
                let opts = VariationalOptions { max_evaluations: *max_evaluations, ..Default::default() };
                (variational_entropy_bound(&rho, &singles, &dis, &opts)?.value, None)
            }
        };
        let cost = match (self.regularize, entropy_b) {
            (true, Some(b)) => regularized_cost(energy, entropy, b, self.beta),
            _ => self.beta * energy - entropy,
        };
        Ok(CostBreakdown { cost, energy, entropy, entropy_b })
    }
}

pub fn cost(
    spec: &AnsatzSpec,
    params: &ParameterVector,
    h: &Matrix,
    beta: f64,
    method: &EntropyMethod,
    regularize: bool,
) -> Result<f64> {
    Ok(CostFunction::new(spec, h, beta, method, regularize)?.evaluate(params)?.cost)
}
