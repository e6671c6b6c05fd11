//! Kraus channels, Lindblad generators and their placement on a register.

mod library;

pub use library::*;

use crate::error::{invalid, Error, Result};
use crate::qcore::{
    c, check_hermitian, identity, max_abs, qubit_count, unvectorize, vectorize, DensityMatrix,
    HermitianEigen, Matrix, SiteEmbedding, ONE,
};

/// Completeness tolerance for `sum K^dagger K = I`.
pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;
/// Smallest Choi eigenvalue accepted as positive.
pub const CHOI_TOLERANCE: f64 = 1e-9;

/// A completely positive trace-preserving map on `arity` qubits.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<Matrix>,
    arity: usize,
}

impl KrausChannel {
    pub fn new(ops: Vec<Matrix>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return invalid("channel needs at least one Kraus operator");
        };
        let d = first.nrows();
        let arity = qubit_count(d)?;
        for k in &ops {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: k.nrows().max(k.ncols()) });
            }
        }
        let ch = Self { ops, arity };
        let defect = ch.completeness_defect();
        if defect > COMPLETENESS_TOLERANCE {
            return invalid(format!("Kraus operators are not trace preserving (defect {defect:e})"));
        }
        Ok(ch)
    }

    pub fn identity(arity: usize) -> Self {
        Self { ops: vec![identity(1 << arity)], arity }
    }

    pub fn unitary(u: Matrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn ops(&self) -> &[Matrix] {
        &self.ops
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let sum = self.ops.iter().fold(Matrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs(&(sum - identity(d)))
    }

    /// `sum_K K X K^dagger` on a matrix of the channel's own dimension.
    pub fn apply_matrix(&self, x: &Matrix) -> Matrix {
        let d = x.nrows();
        self.ops.iter().fold(Matrix::zeros(d, d), |acc, k| acc + k * x * k.adjoint())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        Ok(DensityMatrix::from_trusted(self.apply_matrix(rho.matrix())))
    }

    /// `sum_K conj(K) (x) K`, acting on column-stacked vectors.
    pub fn superoperator(&self) -> Matrix {
        let d = self.dim();
        self.ops
            .iter()
            .fold(Matrix::zeros(d * d, d * d), |acc, k| acc + k.conjugate().kronecker(k))
    }

    /// `sum_ij |i><j| (x) E(|i><j|)`.
    pub fn choi(&self) -> Matrix {
        choi_from_superoperator(&self.superoperator(), self.dim())
    }

    /// `other` after `self`.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if other.arity != self.arity {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let ops = other
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b * a))
            .collect();
        KrausChannel::new(ops)
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        let d = self.dim();
        max_abs(&(self.apply_matrix(&identity(d)) - identity(d))) <= tol
    }
}

/// Reorders a superoperator into the Choi matrix with the input factor first.
pub fn choi_from_superoperator(s: &Matrix, d: usize) -> Matrix {
    let mut j = Matrix::zeros(d * d, d * d);
    for i in 0..d {
        for jj in 0..d {
            for a in 0..d {
                for b in 0..d {
                    j[(i * d + a, jj * d + b)] = s[(a + d * b, i + d * jj)];
                }
            }
        }
    }
    j
}

/// Kraus operators from a Choi matrix; errors when it is not positive.
pub fn kraus_from_choi(choi: &Matrix, d: usize) -> Result<Vec<Matrix>> {
    let j = (choi + choi.adjoint()) * c(0.5, 0.0);
    let eig = HermitianEigen::new(&j)?;
    let top = eig.values.iter().cloned().fold(0.0, f64::max);
    if let Some(&min) = eig.values.first() {
        if min < -CHOI_TOLERANCE * top.max(1.0) {
            return invalid(format!("map is not completely positive (Choi eigenvalue {min:e})"));
        }
    }
    let cutoff = 1e-14 * top.max(1.0);
    let ops = eig
        .values
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &mu)| mu > cutoff)
        .map(|(k, &mu)| {
            let v = eig.vectors.column(k);
            Matrix::from_column_slice(d, d, v.as_slice()) * c(mu.sqrt(), 0.0)
        })
        .collect();
    Ok(ops)
}

/// `d rho / dt = -i[H, rho] + sum_j (L_j rho L_j^dagger - {L_j^dagger L_j, rho} / 2)`.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    pub hamiltonian: Matrix,
    pub jumps: Vec<Matrix>,
    arity: usize,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: Matrix, jumps: Vec<Matrix>) -> Result<Self> {
        let d = hamiltonian.nrows();
        let arity = qubit_count(d)?;
        check_hermitian(&hamiltonian, "Lindblad Hamiltonian")?;
        for l in &jumps {
            if l.nrows() != d || l.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: l.nrows() });
            }
        }
        Ok(Self { hamiltonian, jumps, arity })
    }

    pub fn dissipative(jumps: Vec<Matrix>) -> Result<Self> {
        let Some(first) = jumps.first() else {
            return invalid("generator needs a Hamiltonian or at least one jump");
        };
        let d = first.nrows();
        Self::new(Matrix::zeros(d, d), jumps)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    /// Action on a matrix.
    pub fn apply_matrix(&self, rho: &Matrix) -> Matrix {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * c(0.0, -1.0);
        for l in &self.jumps {
            let ldl = l.adjoint() * l;
            out += l * rho * l.adjoint() - (&ldl * rho + rho * &ldl) * c(0.5, 0.0);
        }
        out
    }

    pub fn superoperator(&self) -> Matrix {
        let d = self.dim();
        let id = identity(d);
        let h = &self.hamiltonian;
        let mut s = (id.kronecker(h) - h.transpose().kronecker(&id)) * c(0.0, -1.0);
        for l in &self.jumps {
            let ldl = l.adjoint() * l;
            s += l.conjugate().kronecker(l)
                - id.kronecker(&ldl) * c(0.5, 0.0)
                - ldl.transpose().kronecker(&id) * c(0.5, 0.0);
        }
        s
    }

    /// `exp(t L)` as a Kraus channel.
    pub fn channel(&self, t: f64) -> Result<KrausChannel> {
        if !t.is_finite() || t < 0.0 {
            return invalid(format!("evolution time must be non-negative, got {t}"));
        }
        let d = self.dim();
        let prop = (self.superoperator() * c(t, 0.0)).exp();
        let ops = kraus_from_choi(&choi_from_superoperator(&prop, d), d)?;
        KrausChannel::new(ops)
    }

    /// Exact evolution of a matrix of the generator's own dimension.
    pub fn evolve_matrix(&self, rho: &Matrix, t: f64) -> Matrix {
        let prop = (self.superoperator() * c(t, 0.0)).exp();
        unvectorize(&(prop * vectorize(rho)), self.dim())
    }

    /// First-order Kraus operators `{I + dt H_nh, sqrt(dt) L_j}` with `H_nh = -iH - sum L^dagger L / 2`.
    ///
    /// Trace preservation holds only to `O(dt^2)`.
    pub fn small_time_kraus(&self, dt: f64) -> Vec<Matrix> {
        let d = self.dim();
        let mut h_nh = &self.hamiltonian * c(0.0, -1.0);
        for l in &self.jumps {
            h_nh -= l.adjoint() * l * c(0.5, 0.0);
        }
        let mut ops = vec![identity(d) + h_nh * c(dt, 0.0)];
        ops.extend(self.jumps.iter().map(|l| l * c(dt.sqrt(), 0.0)));
        ops
    }
}

/// A channel and the sites it acts on.
#[derive(Clone, Debug)]
pub struct Placement {
    channel: KrausChannel,
    embedding: SiteEmbedding,
}

impl Placement {
    pub fn new(channel: KrausChannel, n: usize, sites: &[usize]) -> Result<Self> {
        if sites.len() != channel.arity() {
            return invalid(format!(
                "channel of arity {} placed on {} sites",
                channel.arity(),
                sites.len()
            ));
        }
        Ok(Self { embedding: SiteEmbedding::new(n, sites)?, channel })
    }

    pub fn sites(&self) -> &[usize] {
        self.embedding.sites()
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn apply_matrix(&self, rho: &Matrix) -> Matrix {
        self.embedding.apply_kraus(self.channel.ops(), rho)
    }
}

/// Ordered placements applied one after another.
#[derive(Clone, Debug)]
pub struct ChannelLayer {
    n: usize,
    placements: Vec<Placement>,
}

impl ChannelLayer {
    pub fn new(n: usize) -> Self {
        Self { n, placements: Vec::new() }
    }

    pub fn push(&mut self, channel: KrausChannel, sites: &[usize]) -> Result<&mut Self> {
        self.placements.push(Placement::new(channel, self.n, sites)?);
        Ok(self)
    }

    pub fn push_generator(&mut self, generator: &LindbladGenerator, t: f64, sites: &[usize]) -> Result<&mut Self> {
        let ch = generator.channel(t)?;
        self.push(ch, sites)
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: 1 << self.n, found: rho.dim() });
        }
        let mut m = rho.matrix().clone();
        for p in &self.placements {
            m = p.apply_matrix(&m);
        }
        Ok(DensityMatrix::from_trusted(m))
    }
}

/// Applies `ops` as a local Kraus map on `sites` of an `n`-qubit matrix.
pub fn apply_local_kraus(ops: &[Matrix], n: usize, sites: &[usize], rho: &Matrix) -> Result<Matrix> {
    Ok(SiteEmbedding::new(n, sites)?.apply_kraus(ops, rho))
}

pub(crate) fn scaled(m: &Matrix, s: f64) -> Matrix {
    m * c(s, 0.0)
}

pub(crate) fn outer(a: usize, b: usize, d: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    m[(a, b)] = ONE;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{kron, random, trace, Pauli};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_non_trace_preserving_ops() {
        assert!(KrausChannel::new(vec![identity(2) * c(0.9, 0.0)]).is_err());
        assert!(KrausChannel::new(vec![identity(2), identity(4)]).is_err());
    }

    #[test]
    fn superoperator_matches_direct_application() {
        let ch = pauli_channel(Pauli::X, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random::random_density_matrix(1, &mut rng);
        let direct = ch.apply_matrix(rho.matrix());
        let via = unvectorize(&(ch.superoperator() * vectorize(rho.matrix())), 2);
        assert!(max_abs(&(direct - via)) < 1e-14);
    }

    #[test]
    fn kraus_roundtrip_through_choi() {
        let ch = depolarizing(0.4).unwrap();
        let ops = kraus_from_choi(&ch.choi(), 2).unwrap();
        let back = KrausChannel::new(ops).unwrap();
        assert!(max_abs(&(back.superoperator() - ch.superoperator())) < 1e-12);
    }

    #[test]
    fn lindblad_channel_matches_exact_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random::random_hermitian(4, &mut rng);
        let l = random::ginibre(4, 4, &mut rng) * c(0.3, 0.0);
        let generator = LindbladGenerator::new(h, vec![l]).unwrap();
        let ch = generator.channel(0.8).unwrap();
        let rho = random::random_density_matrix(2, &mut rng);
        let a = ch.apply_matrix(rho.matrix());
        let b = generator.evolve_matrix(rho.matrix(), 0.8);
        assert!(max_abs(&(a - b)) < 1e-10);
        assert!(ch.completeness_defect() < 1e-10);
    }

    #[test]
    fn superoperator_matches_generator_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random::random_hermitian(2, &mut rng);
        let l = random::ginibre(2, 2, &mut rng);
        let generator = LindbladGenerator::new(h, vec![l]).unwrap();
        let rho = random::random_density_matrix(1, &mut rng);
        let direct = generator.apply_matrix(rho.matrix());
        let via = unvectorize(&(generator.superoperator() * vectorize(rho.matrix())), 2);
        assert!(max_abs(&(&direct - via)) < 1e-12);
        assert!(trace(&direct).norm() < 1e-12);
    }

    #[test]
    fn small_time_kraus_converges_at_second_order() {
        let generator = tfim_jump(1.0, 0.5).unwrap();
        let rho = crate::qcore::DensityMatrix::plus_state(1);
        let err = |dt: f64| {
            let ops = generator.small_time_kraus(dt);
            let approx = ops.iter().fold(Matrix::zeros(2, 2), |acc, k| acc + k * rho.matrix() * k.adjoint());
            max_abs(&(approx - generator.evolve_matrix(rho.matrix(), dt)))
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn layer_applies_placements_in_order() {
        let x = KrausChannel::unitary(Pauli::X.matrix()).unwrap();
        let mut layer = ChannelLayer::new(2);
        layer.push(x.clone(), &[1]).unwrap();
        let out = layer.apply(&crate::qcore::DensityMatrix::zero_state(2)).unwrap();
        assert!((out.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!(layer.push(x, &[2]).is_err());
        let two = KrausChannel::unitary(kron(&Pauli::X.matrix(), &Pauli::X.matrix())).unwrap();
        assert!(layer.push(two, &[0, 0]).is_err());
    }
}
