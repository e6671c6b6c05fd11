use super::{Matrix, ZERO};
use crate::error::{invalid, Result};

/// Index tables for acting with a `k`-site operator on selected sites of an `n`-qubit register.
///
/// The first listed site is the most significant qubit of the local operator.
#[derive(Clone, Debug)]
pub struct SiteEmbedding {
    n: usize,
    sites: Vec<usize>,
    offsets: Vec<usize>,
    bases: Vec<usize>,
}

impl SiteEmbedding {
    pub fn new(n: usize, sites: &[usize]) -> Result<Self> {
        if sites.is_empty() {
            return invalid("embedding needs at least one site");
        }
        for (k, &s) in sites.iter().enumerate() {
            if s >= n {
                return invalid(format!("site {s} outside a register of {n} qubits"));
            }
            if sites[..k].contains(&s) {
                return invalid(format!("site {s} appears twice in one placement"));
            }
        }
        let k = sites.len();
        let bit = |s: usize| 1usize << (n - 1 - s);
        let offsets = (0..1usize << k)
            .map(|l| {
                (0..k)
                    .filter(|&p| l >> (k - 1 - p) & 1 == 1)
                    .map(|p| bit(sites[p]))
                    .sum()
            })
            .collect();
        let mask: usize = sites.iter().map(|&s| bit(s)).sum();
        let bases = (0..1usize << n).filter(|x| x & mask == 0).collect();
        Ok(Self { n, sites: sites.to_vec(), offsets, bases })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }

    fn check(&self, op: &Matrix, m: &Matrix) {
        assert_eq!(op.nrows(), self.local_dim(), "local operator dimension");
        assert_eq!(m.nrows(), 1 << self.n, "register dimension");
    }

    /// `(op on sites) * m`.
    pub fn left_mul(&self, op: &Matrix, m: &Matrix) -> Matrix {
        self.check(op, m);
        let d = m.nrows();
        let cols = m.ncols();
        let ld = self.local_dim();
        let src = m.as_slice();
        let mut out = Matrix::zeros(d, cols);
        let dst = out.as_mut_slice();
        let mut buf = vec![ZERO; ld];
        for j in 0..cols {
            let col = j * d;
            for &b in &self.bases {
                for (l, v) in buf.iter_mut().enumerate() {
                    *v = src[col + b + self.offsets[l]];
                }
                for r in 0..ld {
                    let mut acc = ZERO;
                    for (l, v) in buf.iter().enumerate() {
                        acc += op[(r, l)] * v;
                    }
                    dst[col + b + self.offsets[r]] = acc;
                }
            }
        }
        out
    }

    /// `m * (op on sites)^dagger`.
    pub fn right_mul_adjoint(&self, op: &Matrix, m: &Matrix) -> Matrix {
        self.check(op, m);
        let d = m.nrows();
        let ld = self.local_dim();
        let src = m.as_slice();
        let mut out = Matrix::zeros(d, d);
        let dst = out.as_mut_slice();
        for &b in &self.bases {
            for r in 0..ld {
                let out_col = (b + self.offsets[r]) * d;
                for l in 0..ld {
                    let coef = op[(r, l)].conj();
                    if coef == ZERO {
                        continue;
                    }
                    let in_col = (b + self.offsets[l]) * d;
                    for i in 0..d {
                        dst[out_col + i] += coef * src[in_col + i];
                    }
                }
            }
        }
        out
    }

    /// `op m op^dagger` with `op` acting on the embedded sites.
    pub fn conjugate(&self, op: &Matrix, m: &Matrix) -> Matrix {
        self.right_mul_adjoint(op, &self.left_mul(op, m))
    }

    /// `sum_K K m K^dagger`.
    pub fn apply_kraus(&self, ops: &[Matrix], m: &Matrix) -> Matrix {
        let d = m.nrows();
        ops.iter()
            .fold(Matrix::zeros(d, d), |acc, k| acc + self.conjugate(k, m))
    }

    /// Full-register matrix of the embedded operator.
    pub fn embed(&self, op: &Matrix) -> Matrix {
        self.left_mul(op, &Matrix::identity(1 << self.n, 1 << self.n))
    }
}
