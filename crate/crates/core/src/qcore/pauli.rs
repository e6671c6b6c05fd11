use serde::{Deserialize, Serialize};

use super::{c, identity, kron_all, Matrix, ONE, ZERO};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix {
        let i = c(0.0, 1.0);
        match self {
            Pauli::I => identity(2),
            Pauli::X => Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => Matrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
            Pauli::Z => Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }

    pub fn from_char(ch: char) -> Result<Self> {
        match ch {
            'I' | '1' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => invalid(format!("unknown Pauli label {other:?}")),
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, Pauli::I | Pauli::Z)
    }
}

/// A real multiple of a tensor product of Pauli operators.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub ops: Vec<Pauli>,
    pub coefficient: f64,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self { ops, coefficient: 1.0 }
    }

    /// Parses labels like `"ZZI"`; `1` is accepted for the identity.
    pub fn parse(label: &str) -> Result<Self> {
        let ops = label.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return invalid("empty Pauli label");
        }
        Ok(Self::new(ops))
    }

    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[site] = p;
        Self::new(ops)
    }

    pub fn pair(n: usize, a: usize, b: usize, p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[a] = p;
        ops[b] = p;
        Self::new(ops)
    }

    pub fn scaled(mut self, coefficient: f64) -> Self {
        self.coefficient *= coefficient;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.ops.iter().all(|p| p.is_diagonal())
    }

    /// Diagonal in the computational basis; only meaningful for `I`/`Z` strings.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.ops.len();
        let z_mask: usize = self
            .ops
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == Pauli::Z)
            .map(|(k, _)| 1usize << (n - 1 - k))
            .sum();
        (0..1usize << n)
            .map(|x| {
                let sign = if (x & z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sign * self.coefficient
            })
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        let mats: Vec<Matrix> = self.ops.iter().map(|p| p.matrix()).collect();
        kron_all(mats.iter()) * c(self.coefficient, 0.0)
    }

    pub fn label(&self) -> String {
        self.ops
            .iter()
            .map(|p| match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }
}

/// Nearest-neighbour bonds `(k, k+1 mod n)` of a periodic ring.
///
/// Two sites form a single bond and one site has none.
pub fn ring_bonds(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|k| (k, (k + 1) % n)).collect(),
    }
}

/// `sum_k P_k`.
pub fn field_sum(n: usize, p: Pauli) -> Matrix {
    let d = 1usize << n;
    (0..n).fold(Matrix::zeros(d, d), |acc, k| acc + PauliString::single(n, k, p).to_matrix())
}

/// `sum_k P_k P_{k+1}` over the ring bonds.
pub fn ring_coupling_sum(n: usize, p: Pauli) -> Matrix {
    let d = 1usize << n;
    ring_bonds(n)
        .into_iter()
        .fold(Matrix::zeros(d, d), |acc, (a, b)| acc + PauliString::pair(n, a, b, p).to_matrix())
}
