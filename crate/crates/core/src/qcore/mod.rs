//! Dense linear algebra over qubit registers.
//!
//! Site 0 is the most significant qubit of the computational basis index.
//! Superoperators act on column-stacked vectorisations.

mod local;
mod pauli;
pub mod random;

pub use local::SiteEmbedding;
pub use pauli::{field_sum, ring_bonds, ring_coupling_sum, Pauli, PauliString};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Eigenvalues in `[NEGATIVE_TOLERANCE, EIGEN_FLOOR]` are raised to the floor before a log.
pub const EIGEN_FLOOR: f64 = 1e-12;
/// Eigenvalues below this are treated as a genuine loss of positivity.
pub const NEGATIVE_TOLERANCE: f64 = -1e-10;
/// Relative tolerance on `max|A - A^dagger|` for accepting a matrix as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOLERANCE: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> Matrix {
    Matrix::identity(d, d)
}

/// Number of qubits of a `2^n` dimensional space.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return invalid(format!("dimension {dim} is not a power of two"));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Kronecker product with `a` on the more significant factor.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a Matrix>) -> Matrix {
    ops.into_iter()
        .fold(identity(1), |acc, op| acc.kronecker(op))
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &Matrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &Matrix) -> bool {
    m.is_square() && hermiticity_defect(m) <= HERMITIAN_TOLERANCE * max_abs(m).max(1.0)
}

pub fn check_hermitian(m: &Matrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return invalid(format!("{what} is not square"));
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOLERANCE * max_abs(m).max(1.0) {
        return invalid(format!("{what} is not Hermitian (defect {defect:e})"));
    }
    Ok(())
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

pub fn anticommutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b + b * a
}

pub fn trace(m: &Matrix) -> C64 {
    m.diagonal().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &Matrix, b: &Matrix) -> C64 {
    let d = a.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let gram = m.adjoint() * m;
    let vals = gram.symmetric_eigenvalues();
    vals.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
}

pub fn is_unitary(u: &Matrix, tol: f64) -> bool {
    u.is_square() && max_abs(&(u.adjoint() * u - identity(u.nrows()))) <= tol
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, ordered like `values`.
    pub vectors: Matrix,
}

impl HermitianEigen {
    pub fn new(m: &Matrix) -> Result<Self> {
        check_hermitian(m, "matrix")?;
        let sym = (m + m.adjoint()) * c(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Matrix::from_columns(
            &order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        Ok(Self { values, vectors })
    }

    /// `V diag(f(lambda)) V^dagger` for a complex-valued `f`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Matrix {
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let fk = f(lam);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> Matrix {
        self.map(|x| c(f(x), 0.0))
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map_real(|x| x)
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order, without eigenvectors.
pub fn hermitian_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    check_hermitian(m, "matrix")?;
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Applies the eigenvalue floor used before taking logarithms.
pub fn floor_eigenvalue(lam: f64) -> Result<f64> {
    if lam < NEGATIVE_TOLERANCE {
        return Err(Error::NegativeEigenvalue(lam));
    }
    Ok(lam.max(EIGEN_FLOOR))
}

pub fn hermitian_function(m: &Matrix, f: impl Fn(f64) -> f64) -> Result<Matrix> {
    Ok(HermitianEigen::new(m)?.map_real(f))
}

/// Matrix logarithm of a positive semidefinite matrix with the eigenvalue floor.
pub fn matrix_log(m: &Matrix) -> Result<Matrix> {
    let eig = HermitianEigen::new(m)?;
    for &lam in &eig.values {
        floor_eigenvalue(lam)?;
    }
    Ok(eig.map_real(|x| x.max(EIGEN_FLOOR).ln()))
}

/// Principal square root of a positive semidefinite matrix.
pub fn matrix_sqrt(m: &Matrix) -> Result<Matrix> {
    let eig = HermitianEigen::new(m)?;
    for &lam in &eig.values {
        floor_eigenvalue(lam)?;
    }
    Ok(eig.map_real(|x| x.max(0.0).sqrt()))
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn unitary_evolution(h: &Matrix, t: f64) -> Result<Matrix> {
    Ok(HermitianEigen::new(h)?.map(|e| C64::from_polar(1.0, -e * t)))
}

/// Entropy of a spectrum in nats. Zero eigenvalues contribute nothing.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&lam| lam > 0.0)
        .map(|&lam| -lam * lam.max(EIGEN_FLOOR).ln())
        .sum()
}

/// A validated density matrix on `n` qubits.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: Matrix,
    n_qubits: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within tolerance.
    pub fn new(matrix: Matrix) -> Result<Self> {
        let n_qubits = qubit_count(matrix.nrows())?;
        if !matrix.is_square() {
            return invalid("density matrix is not square");
        }
        check_hermitian(&matrix, "density matrix")?;
        let tr = trace(&matrix);
        if (tr - ONE).norm() > TRACE_TOLERANCE {
            return invalid(format!("density matrix trace is {tr}"));
        }
        let vals = hermitian_eigenvalues(&matrix)?;
        if let Some(&min) = vals.first() {
            if min < NEGATIVE_TOLERANCE {
                return Err(Error::NegativeEigenvalue(min));
            }
        }
        Ok(Self { matrix, n_qubits })
    }

    /// Clips small negative eigenvalues to zero and restores unit trace.
    pub fn clip_and_renormalize(matrix: &Matrix) -> Result<Self> {
        let n_qubits = qubit_count(matrix.nrows())?;
        let eig = HermitianEigen::new(matrix)?;
        for &lam in &eig.values {
            floor_eigenvalue(lam)?;
        }
        let total: f64 = eig.values.iter().map(|x| x.max(0.0)).sum();
        if total <= 0.0 {
            return invalid("matrix has no positive spectrum");
        }
        let m = eig.map_real(|x| x.max(0.0) / total);
        Ok(Self { matrix: m, n_qubits })
    }

    /// Wraps a matrix produced by a trace-preserving map of a valid state.
    pub(crate) fn from_trusted(matrix: Matrix) -> Self {
        let n_qubits = matrix.nrows().trailing_zeros() as usize;
        debug_assert!(matrix.nrows().is_power_of_two());
        Self { matrix, n_qubits }
    }

    pub fn pure(psi: &Vector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return invalid("zero state vector");
        }
        let v = psi / c(norm, 0.0);
        qubit_count(v.len())?;
        Ok(Self::from_trusted(&v * v.adjoint()))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        Self::from_trusted(identity(d) * c(1.0 / d as f64, 0.0))
    }

    /// `|0...0><0...0|`.
    pub fn zero_state(n: usize) -> Self {
        let d = 1usize << n;
        let mut m = Matrix::zeros(d, d);
        m[(0, 0)] = ONE;
        Self::from_trusted(m)
    }

    /// `|+...+><+...+|`.
    pub fn plus_state(n: usize) -> Self {
        let d = 1usize << n;
        Self::from_trusted(Matrix::from_element(d, d, c(1.0 / d as f64, 0.0)))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix).unwrap_or_else(|_| {
            let sym = (&self.matrix + self.matrix.adjoint()) * c(0.5, 0.0);
            sym.symmetric_eigenvalues().iter().cloned().collect()
        })
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).re
    }
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

/// `Tr(rho O)` for Hermitian `O`.
pub fn expectation(rho: &DensityMatrix, obs: &Matrix) -> Result<f64> {
    if obs.nrows() != rho.dim() || obs.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: obs.nrows() });
    }
    Ok(trace_product(rho.matrix(), obs).re)
}

/// Reduced state on `keep`, returned in ascending site order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(partial_trace_matrix(rho.matrix(), rho.n_qubits(), keep)?))
}

pub fn partial_trace_matrix(m: &Matrix, n: usize, keep: &[usize]) -> Result<Matrix> {
    if m.nrows() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: m.nrows() });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return invalid("partial trace sites repeat");
    }
    if let Some(&s) = kept.iter().find(|&&s| s >= n) {
        return invalid(format!("site {s} outside a register of {n} qubits"));
    }
    let traced: Vec<usize> = (0..n).filter(|s| !kept.contains(s)).collect();
    let bit = |site: usize| 1usize << (n - 1 - site);
    let spread = |sites: &[usize], x: usize| -> usize {
        let k = sites.len();
        sites
            .iter()
            .enumerate()
            .filter(|(pos, _)| x >> (k - 1 - pos) & 1 == 1)
            .map(|(_, &s)| bit(s))
            .sum()
    };
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let kept_idx: Vec<usize> = (0..dk).map(|x| spread(&kept, x)).collect();
    let traced_idx: Vec<usize> = (0..dt).map(|x| spread(&traced, x)).collect();
    let mut out = Matrix::zeros(dk, dk);
    for b in 0..dk {
        for a in 0..dk {
            let mut acc = ZERO;
            for &t in &traced_idx {
                acc += m[(kept_idx[a] + t, kept_idx[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, clipped to `[0, 1]`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let sqrt_rho = HermitianEigen::new(rho.matrix())?.map_real(|x| x.max(0.0).sqrt());
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let vals = hermitian_eigenvalues(&inner)?;
    let root_trace: f64 = vals.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Column-stacked vectorisation.
pub fn vectorize(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &Vector, d: usize) -> Matrix {
    Matrix::from_column_slice(d, d, v.as_slice())
}

/// Multiplies every entry `rho[i][j]` by `exp(-i t (d_i - d_j))`, i.e. conjugation by a diagonal unitary.
pub fn apply_diagonal_phase(rho: &mut Matrix, diag: &[f64], t: f64) {
    let d = diag.len();
    let phases: Vec<C64> = diag.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect();
    for j in 0..d {
        let pj = phases[j].conj();
        for i in 0..d {
            rho[(i, j)] *= phases[i] * pj;
        }
    }
}
