//! Layered ansatz: unitary terms with trainable angles followed by parameterised channels.

use serde::{Deserialize, Serialize};

use crate::channels::{
    heisenberg_pair_jumps, ising_projector_channel, pauli_channel_of, tfim_jump_with, KrausChannel,
    PauliChannelKind,
};
use crate::error::{invalid, Error, Result};
use crate::models::SpinModel;
use crate::qcore::{
    apply_diagonal_phase, c, field_sum, ring_bonds, ring_coupling_sum, DensityMatrix, HermitianEigen, Matrix,
    Pauli, PauliString, SiteEmbedding, Vector, C64,
};

/// A translation-invariant generator `G`; a layer applies `exp(-i theta G)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "term", content = "pauli")]
pub enum UnitaryTerm {
    /// `-sum_k P_k`; `Field(X)` is the mixing Hamiltonian.
    Field(Pauli),
    /// `-sum_k P_k P_{k+1}` over ring bonds.
    Coupling(Pauli),
    /// The ansatz's model Hamiltonian at the register size.
    Problem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Bitflip,
    Phaseflip,
    Depolarizing,
    /// Two-site pump into aligned bonds.
    IsingProjector,
    /// Single-site heating jump with parameters `(p t, q)`.
    TfimJump,
    /// Hadamard-rotated heating jump.
    TfimJumpConjugated,
    /// Two-site aligning/antialigning jumps with parameters `(kappa_f t, kappa_af t)`.
    HeisenbergPair,
}

impl ChannelKind {
    pub fn arity(self) -> usize {
        match self {
            ChannelKind::IsingProjector | ChannelKind::HeisenbergPair => 2,
            _ => 1,
        }
    }

    /// Bounds of each parameter of one placement.
    pub fn bounds(self) -> &'static [(f64, f64)] {
        match self {
            ChannelKind::Bitflip | ChannelKind::Phaseflip => &[(0.0, 0.5)],
            ChannelKind::Depolarizing | ChannelKind::IsingProjector => &[(0.0, 1.0)],
            ChannelKind::TfimJump | ChannelKind::TfimJumpConjugated => &[(0.0, 2.0), (-2.0, 2.0)],
            ChannelKind::HeisenbergPair => &[(0.0, 3.0), (0.0, 3.0)],
        }
    }

    pub fn channel(self, params: &[f64]) -> Result<KrausChannel> {
        match self {
            ChannelKind::Bitflip => pauli_channel_of(PauliChannelKind::Bitflip, params[0]),
            ChannelKind::Phaseflip => pauli_channel_of(PauliChannelKind::Phaseflip, params[0]),
            ChannelKind::Depolarizing => pauli_channel_of(PauliChannelKind::Depolarizing, params[0]),
            ChannelKind::IsingProjector => ising_projector_channel(params[0]),
            ChannelKind::TfimJump => tfim_jump_with(params[0], params[1], false)?.channel(1.0),
            ChannelKind::TfimJumpConjugated => tfim_jump_with(params[0], params[1], true)?.channel(1.0),
            ChannelKind::HeisenbergPair => heisenberg_pair_jumps(params[0], params[1])?.channel(1.0),
        }
    }
}

/// One channel parameter set per layer, or one per placement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sharing {
    #[default]
    Shared,
    PerSite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    #[serde(default)]
    pub sharing: Sharing,
}

impl ChannelSpec {
    pub fn shared(kind: ChannelKind) -> Self {
        Self { kind, sharing: Sharing::Shared }
    }

    /// Sites of each placement: every site for one-site channels, every ring bond for two-site ones.
    pub fn placements(&self, n: usize) -> Vec<Vec<usize>> {
        match self.kind.arity() {
            1 => (0..n).map(|s| vec![s]).collect(),
            _ => ring_bonds(n).into_iter().map(|(a, b)| vec![a, b]).collect(),
        }
    }

    pub fn parameter_count(&self, n: usize) -> usize {
        let per = self.kind.bounds().len();
        match self.sharing {
            Sharing::Shared => per,
            Sharing::PerSite => per * self.placements(n).len(),
        }
    }

    fn bounds(&self, n: usize) -> Vec<(f64, f64)> {
        let reps = self.parameter_count(n) / self.kind.bounds().len();
        (0..reps).flat_map(|_| self.kind.bounds().iter().copied()).collect()
    }
}

/// Preparation unitary applied to `|0...0>`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialUnitary {
    /// Hadamard on every site, giving `|+...+>`.
    #[default]
    Hadamard,
    Identity,
}

/// Angles and channel parameters of an ansatz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    /// Layer-major, one angle per unitary term.
    pub theta: Vec<f64>,
    /// Layer-major, channel order, then placement order.
    pub lambda: Vec<f64>,
}

/// Description of the layered ansatz.
///
/// Each layer applies `prod_k exp(-i theta_k G_k)` with `terms` in product order, so the
/// last listed term acts first, then every channel in `channels` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n: usize,
    pub layers: usize,
    pub terms: Vec<UnitaryTerm>,
    pub channels: Vec<ChannelSpec>,
    pub model: Option<SpinModel>,
    #[serde(default)]
    pub initial: InitialUnitary,
}

impl AnsatzSpec {
    pub fn new(n: usize, layers: usize, terms: Vec<UnitaryTerm>, channels: Vec<ChannelSpec>) -> Self {
        Self { n, layers, terms, channels, model: None, initial: InitialUnitary::Hadamard }
    }

    /// Mixing then problem Hamiltonian per layer, `exp(-i theta_0 H_M) exp(-i theta_1 H)`.
    pub fn alternating(model: &SpinModel, layers: usize, channels: Vec<ChannelSpec>) -> Self {
        Self {
            model: Some(model.clone()),
            ..Self::new(model.n, layers, vec![UnitaryTerm::Field(Pauli::X), UnitaryTerm::Problem], channels)
        }
    }

    pub fn with_model(mut self, model: &SpinModel) -> Self {
        self.model = Some(model.resized(self.n));
        self
    }

    /// Same family on a register of a different size.
    pub fn resized(&self, n: usize) -> Self {
        Self { n, model: self.model.as_ref().map(|m| m.resized(n)), ..self.clone() }
    }

    /// True when every parameter is shared across sites, so the same parameters fit any size.
    pub fn size_parametric(&self) -> bool {
        self.channels.iter().all(|ch| ch.sharing == Sharing::Shared)
    }

    pub fn theta_count(&self) -> usize {
        self.layers * self.terms.len()
    }

    pub fn lambda_per_layer(&self) -> usize {
        self.channels.iter().map(|ch| ch.parameter_count(self.n)).sum()
    }

    pub fn lambda_count(&self) -> usize {
        self.layers * self.lambda_per_layer()
    }

    pub fn lambda_bounds(&self) -> Vec<(f64, f64)> {
        let layer: Vec<(f64, f64)> = self.channels.iter().flat_map(|ch| ch.bounds(self.n)).collect();
        (0..self.layers).flat_map(|_| layer.iter().copied()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("ansatz needs at least one site");
        }
        if self.terms.contains(&UnitaryTerm::Problem) {
            let Some(model) = &self.model else {
                return invalid("a problem term needs a model");
            };
            if model.n != self.n {
                return invalid(format!("model has {} sites but the ansatz {}", model.n, self.n));
            }
            model.validate()?;
        }
        for ch in &self.channels {
            if ch.kind.arity() > self.n {
                return invalid(format!("{:?} needs at least {} sites", ch.kind, ch.kind.arity()));
            }
        }
        Ok(())
    }

    /// Zero angles and every channel parameter at the middle of its bounds.
    pub fn default_parameters(&self) -> ParameterVector {
        ParameterVector {
            theta: vec![0.0; self.theta_count()],
            lambda: self.lambda_bounds().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect(),
        }
    }

    /// Parameters with every channel parameter at its lower bound, which makes most channels the identity.
    pub fn identity_channel_parameters(&self, theta: Vec<f64>) -> ParameterVector {
        ParameterVector { theta, lambda: self.lambda_bounds().iter().map(|b| b.0).collect() }
    }

    pub fn check_parameters(&self, params: &ParameterVector) -> Result<()> {
        if params.theta.len() != self.theta_count() {
            return Err(Error::DimensionMismatch { expected: self.theta_count(), found: params.theta.len() });
        }
        if params.lambda.len() != self.lambda_count() {
            return Err(Error::DimensionMismatch { expected: self.lambda_count(), found: params.lambda.len() });
        }
        if params.theta.iter().chain(&params.lambda).any(|x| !x.is_finite()) {
            return invalid("parameters must be finite");
        }
        Ok(())
    }

    pub fn compile(&self) -> Result<CompiledAnsatz> {
        CompiledAnsatz::new(self)
    }
}

#[derive(Clone, Debug)]
enum CompiledTerm {
    /// Diagonal generator.
    Diagonal(Vec<f64>),
    /// `exp(i theta P)` on each listed placement; placements commute.
    Rotations { op: Matrix, embeddings: Vec<SiteEmbedding> },
    Dense(HermitianEigen),
}

impl CompiledTerm {
    fn new(term: UnitaryTerm, spec: &AnsatzSpec) -> Result<Self> {
        let n = spec.n;
        let single = || -> Result<Vec<SiteEmbedding>> { (0..n).map(|s| SiteEmbedding::new(n, &[s])).collect() };
        Ok(match term {
            UnitaryTerm::Field(Pauli::I) | UnitaryTerm::Coupling(Pauli::I) => CompiledTerm::Diagonal(vec![0.0; 1 << n]),
            UnitaryTerm::Field(Pauli::Z) => {
                CompiledTerm::Diagonal(diag_sum((0..n).map(|s| PauliString::single(n, s, Pauli::Z).scaled(-1.0)), n))
            }
            UnitaryTerm::Coupling(Pauli::Z) => CompiledTerm::Diagonal(diag_sum(
                ring_bonds(n).into_iter().map(|(a, b)| PauliString::pair(n, a, b, Pauli::Z).scaled(-1.0)),
                n,
            )),
            UnitaryTerm::Field(p) => CompiledTerm::Rotations { op: p.matrix(), embeddings: single()? },
            UnitaryTerm::Coupling(p) => CompiledTerm::Rotations {
                op: p.matrix().kronecker(&p.matrix()),
                embeddings: ring_bonds(n)
                    .into_iter()
                    .map(|(a, b)| SiteEmbedding::new(n, &[a, b]))
                    .collect::<Result<_>>()?,
            },
            UnitaryTerm::Problem => {
                let model = spec.model.as_ref().ok_or_else(|| Error::InvalidInput("problem term needs a model".into()))?;
                let h = model.hamiltonian()?;
                if model.is_diagonal() {
                    CompiledTerm::Diagonal(h.diagonal().iter().map(|z| z.re).collect())
                } else {
                    CompiledTerm::Dense(HermitianEigen::new(&h)?)
                }
            }
        })
    }

    fn rotation(op: &Matrix, theta: f64) -> Matrix {
        // exp(-i theta (-P)) with P^2 = I
        let d = op.nrows();
        Matrix::identity(d, d) * c(theta.cos(), 0.0) + op * c(0.0, theta.sin())
    }

    fn apply_density(&self, rho: &mut Matrix, theta: f64) {
        match self {
            CompiledTerm::Diagonal(diag) => apply_diagonal_phase(rho, diag, theta),
            CompiledTerm::Rotations { op, embeddings } => {
                let u = Self::rotation(op, theta);
                for e in embeddings {
                    *rho = e.conjugate(&u, rho);
                }
            }
            CompiledTerm::Dense(eig) => {
                let v = &eig.vectors;
                let mut inner = v.adjoint() * &*rho * v;
                let phases: Vec<C64> = eig.values.iter().map(|&e| C64::from_polar(1.0, -e * theta)).collect();
                let d = phases.len();
                for j in 0..d {
                    for i in 0..d {
                        inner[(i, j)] *= phases[i] * phases[j].conj();
                    }
                }
                *rho = v * inner * v.adjoint();
            }
        }
    }

    fn apply_state(&self, psi: &mut Vector, theta: f64) {
        match self {
            CompiledTerm::Diagonal(diag) => {
                for (z, &e) in psi.iter_mut().zip(diag) {
                    *z *= C64::from_polar(1.0, -e * theta);
                }
            }
            CompiledTerm::Rotations { op, embeddings } => {
                let u = Self::rotation(op, theta);
                let mut m = Matrix::from_column_slice(psi.len(), 1, psi.as_slice());
                for e in embeddings {
                    m = e.left_mul(&u, &m);
                }
                *psi = m.column(0).into_owned();
            }
            CompiledTerm::Dense(eig) => {
                let mut inner = eig.vectors.adjoint() * &*psi;
                for (z, &e) in inner.iter_mut().zip(&eig.values) {
                    *z *= C64::from_polar(1.0, -e * theta);
                }
                *psi = &eig.vectors * inner;
            }
        }
    }
}

fn diag_sum(strings: impl Iterator<Item = PauliString>, n: usize) -> Vec<f64> {
    strings.fold(vec![0.0; 1 << n], |mut acc, s| {
        for (a, v) in acc.iter_mut().zip(s.diagonal()) {
            *a += v;
        }
        acc
    })
}

#[derive(Clone, Debug)]
struct CompiledChannel {
    spec: ChannelSpec,
    embeddings: Vec<SiteEmbedding>,
}

/// An ansatz with all parameter-independent work done once.
#[derive(Clone, Debug)]
pub struct CompiledAnsatz {
    spec: AnsatzSpec,
    terms: Vec<CompiledTerm>,
    channels: Vec<CompiledChannel>,
    bounds: Vec<(f64, f64)>,
}

impl CompiledAnsatz {
    pub fn new(spec: &AnsatzSpec) -> Result<Self> {
        spec.validate()?;
        let terms = spec.terms.iter().map(|&t| CompiledTerm::new(t, spec)).collect::<Result<_>>()?;
        let channels = spec
            .channels
            .iter()
            .map(|ch| {
                Ok(CompiledChannel {
                    spec: *ch,
                    embeddings: ch
                        .placements(spec.n)
                        .iter()
                        .map(|sites| SiteEmbedding::new(spec.n, sites))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { spec: spec.clone(), terms, channels, bounds: spec.lambda_bounds() })
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    fn initial_density(&self) -> Matrix {
        match self.spec.initial {
            InitialUnitary::Hadamard => DensityMatrix::plus_state(self.spec.n).into_matrix(),
            InitialUnitary::Identity => DensityMatrix::zero_state(self.spec.n).into_matrix(),
        }
    }

    fn initial_vector(&self) -> Vector {
        let d = 1usize << self.spec.n;
        match self.spec.initial {
            InitialUnitary::Hadamard => Vector::from_element(d, c(1.0 / (d as f64).sqrt(), 0.0)),
            InitialUnitary::Identity => {
                let mut v = Vector::zeros(d);
                v[0] = c(1.0, 0.0);
                v
            }
        }
    }

    /// Applies the unitary part of layer `j`.
    fn apply_unitary_layer(&self, rho: &mut Matrix, theta: &[f64]) {
        for (term, &t) in self.terms.iter().zip(theta).rev() {
            term.apply_density(rho, t);
        }
    }

    fn apply_channel_layer(&self, rho: &mut Matrix, lambda: &[f64]) -> Result<()> {
        let mut offset = 0;
        for ch in &self.channels {
            let per = ch.spec.kind.bounds().len();
            match ch.spec.sharing {
                Sharing::Shared => {
                    let kraus = ch.spec.kind.channel(&lambda[offset..offset + per])?;
                    for e in &ch.embeddings {
                        *rho = e.apply_kraus(kraus.ops(), rho);
                    }
                    offset += per;
                }
                Sharing::PerSite => {
                    for e in &ch.embeddings {
                        let kraus = ch.spec.kind.channel(&lambda[offset..offset + per])?;
                        *rho = e.apply_kraus(kraus.ops(), rho);
                        offset += per;
                    }
                }
            }
        }
        Ok(())
    }

    /// Output state for the given parameters. Channel parameters are clamped to their bounds.
    pub fn evaluate(&self, params: &ParameterVector) -> Result<DensityMatrix> {
        self.spec.check_parameters(params)?;
        let lambda: Vec<f64> = params
            .lambda
            .iter()
            .zip(&self.bounds)
            .map(|(x, (lo, hi))| x.clamp(*lo, *hi))
            .collect();
        let nt = self.terms.len();
        let nl = self.spec.lambda_per_layer();
        let mut rho = self.initial_density();
        for j in 0..self.spec.layers {
            self.apply_unitary_layer(&mut rho, &params.theta[j * nt..(j + 1) * nt]);
            self.apply_channel_layer(&mut rho, &lambda[j * nl..(j + 1) * nl])?;
        }
        Ok(DensityMatrix::from_trusted((&rho + rho.adjoint()) * c(0.5, 0.0)))
    }

    /// Pure output of the unitary part alone, ignoring every channel.
    pub fn evaluate_unitary_state(&self, theta: &[f64]) -> Result<Vector> {
        if theta.len() != self.spec.theta_count() {
            return Err(Error::DimensionMismatch { expected: self.spec.theta_count(), found: theta.len() });
        }
        let nt = self.terms.len();
        let mut psi = self.initial_vector();
        for j in 0..self.spec.layers {
            for (term, &t) in self.terms.iter().zip(&theta[j * nt..(j + 1) * nt]).rev() {
                term.apply_state(&mut psi, t);
            }
        }
        Ok(psi)
    }
}

pub fn evaluate_ansatz(spec: &AnsatzSpec, params: &ParameterVector) -> Result<DensityMatrix> {
    spec.compile()?.evaluate(params)
}

/// Dense generator of a unitary term on `n` sites, for reference computations.
pub fn term_generator(term: UnitaryTerm, n: usize, model: Option<&SpinModel>) -> Result<Matrix> {
    Ok(match term {
        UnitaryTerm::Field(p) => field_sum(n, p) * c(-1.0, 0.0),
        UnitaryTerm::Coupling(p) => ring_coupling_sum(n, p) * c(-1.0, 0.0),
        UnitaryTerm::Problem => model
            .ok_or_else(|| Error::InvalidInput("problem term needs a model".into()))?
            .resized(n)
            .hamiltonian()?,
    })
}
