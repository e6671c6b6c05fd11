//! Spin-chain Hamiltonians on periodic rings and their Gibbs states.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qcore::{
    c, check_hermitian, field_sum, ring_coupling_sum, trace_product, DensityMatrix, HermitianEigen,
    Matrix, Pauli,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `-J sum Z Z - g sum Z`.
    Ising,
    /// `-J sum Z Z - g sum X`.
    Tfim,
    /// `s (sum XX + YY + ZZ + Delta sum X)` with overall sign `s`.
    Heisenberg,
}

/// Overall sign of the Heisenberg Hamiltonian. `Negative` is the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSign {
    #[default]
    Negative,
    Positive,
}

impl CouplingSign {
    pub fn value(self) -> f64 {
        match self {
            CouplingSign::Negative => -1.0,
            CouplingSign::Positive => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinModel {
    pub kind: ModelKind,
    pub n: usize,
    pub j: f64,
    pub g: f64,
    pub delta: f64,
    pub sign: CouplingSign,
}

impl SpinModel {
    pub fn ising(n: usize) -> Self {
        Self { kind: ModelKind::Ising, n, j: 1.0, g: 1.0, delta: 0.0, sign: CouplingSign::Negative }
    }

    pub fn tfim(n: usize) -> Self {
        Self { kind: ModelKind::Tfim, ..Self::ising(n) }
    }

    pub fn heisenberg(n: usize, delta: f64) -> Self {
        Self { kind: ModelKind::Heisenberg, delta, ..Self::ising(n) }
    }

    pub fn with_couplings(mut self, j: f64, g: f64) -> Self {
        self.j = j;
        self.g = g;
        self
    }

    pub fn with_sign(mut self, sign: CouplingSign) -> Self {
        self.sign = sign;
        self
    }

    /// Same model on a register of a different size.
    pub fn resized(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return invalid(format!("periodic chains need n >= 3, got {}", self.n));
        }
        if ![self.j, self.g, self.delta].iter().all(|x| x.is_finite()) {
            return invalid("model couplings must be finite");
        }
        Ok(())
    }

    /// True when the Hamiltonian is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.kind == ModelKind::Ising
    }

    pub fn hamiltonian(&self) -> Result<Matrix> {
        self.validate()?;
        let n = self.n;
        Ok(match self.kind {
            ModelKind::Ising => {
                ring_coupling_sum(n, Pauli::Z) * c(-self.j, 0.0) + field_sum(n, Pauli::Z) * c(-self.g, 0.0)
            }
            ModelKind::Tfim => {
                ring_coupling_sum(n, Pauli::Z) * c(-self.j, 0.0) + field_sum(n, Pauli::X) * c(-self.g, 0.0)
            }
            ModelKind::Heisenberg => {
                let exchange = ring_coupling_sum(n, Pauli::X)
                    + ring_coupling_sum(n, Pauli::Y)
                    + ring_coupling_sum(n, Pauli::Z);
                (exchange + field_sum(n, Pauli::X) * c(self.delta, 0.0)) * c(self.sign.value(), 0.0)
            }
        })
    }
}

pub fn build_hamiltonian(model: &SpinModel) -> Result<Matrix> {
    model.hamiltonian()
}

/// `-sum_k X_k`, whose ground state is `|+...+>`.
pub fn mixing_hamiltonian(n: usize) -> Matrix {
    field_sum(n, Pauli::X) * c(-1.0, 0.0)
}

/// `|+...+><+...+|`.
pub fn initial_state(n: usize) -> DensityMatrix {
    DensityMatrix::plus_state(n)
}

/// Gibbs state together with its spectral data.
#[derive(Clone, Debug)]
pub struct GibbsTarget {
    pub beta: f64,
    pub state: DensityMatrix,
    /// Ascending energies.
    pub energies: Vec<f64>,
    pub log_partition_function: f64,
    pub energy: f64,
    pub entropy: f64,
}

impl GibbsTarget {
    pub fn partition_function(&self) -> f64 {
        self.log_partition_function.exp()
    }

    /// `F = E - S / beta`; infinite at `beta = 0`.
    pub fn free_energy(&self) -> f64 {
        -self.log_partition_function / self.beta
    }
}

/// `exp(-beta H) / Z`, computed with a shifted spectrum so large `beta` does not overflow.
pub fn gibbs_state(h: &Matrix, beta: f64) -> Result<GibbsTarget> {
    if !beta.is_finite() || beta < 0.0 {
        return invalid(format!("beta must be finite and non-negative, got {beta}"));
    }
    check_hermitian(h, "Hamiltonian")?;
    let eig = HermitianEigen::new(h)?;
    let e0 = eig.values[0];
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z_shifted: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / z_shifted).collect();
    let log_z = z_shifted.ln() - beta * e0;
    let energy: f64 = probs.iter().zip(&eig.values).map(|(p, e)| p * e).sum();
    let entropy = crate::qcore::spectrum_entropy(&probs);
    let rho = eig.map_real(|e| (-beta * (e - e0)).exp() / z_shifted);
    Ok(GibbsTarget {
        beta,
        state: DensityMatrix::from_trusted((&rho + rho.adjoint()) * c(0.5, 0.0)),
        energies: eig.values,
        log_partition_function: log_z,
        energy,
        entropy,
    })
}

/// `Tr(rho H) - S / beta`, with the entropy supplied by the caller.
pub fn free_energy(rho: &DensityMatrix, h: &Matrix, beta: f64, entropy: f64) -> Result<f64> {
    if beta <= 0.0 {
        return invalid("free energy needs beta > 0");
    }
    Ok(trace_product(rho.matrix(), h).re - entropy / beta)
}
