//! Ansatz families used by the reproduction studies.

use crate::models::SpinModel;
use crate::qcore::Pauli;
use crate::vqt::{AnsatzSpec, ChannelKind, ChannelSpec, UnitaryTerm};

/// Alternating ansatz with projector and bitflip channels for the diagonal Ising ring.
pub fn ising_ansatz(model: &SpinModel, layers: usize) -> AnsatzSpec {
    AnsatzSpec::alternating(
        model,
        layers,
        vec![ChannelSpec::shared(ChannelKind::Bitflip), ChannelSpec::shared(ChannelKind::IsingProjector)],
    )
}

/// Alternating ansatz with a single one-site channel kind.
pub fn single_channel_ansatz(model: &SpinModel, layers: usize, kind: ChannelKind) -> AnsatzSpec {
    AnsatzSpec::alternating(model, layers, vec![ChannelSpec::shared(kind)])
}

/// Phaseflip channels, optionally followed by the two-site Heisenberg jumps.
pub fn heisenberg_ansatz(model: &SpinModel, layers: usize, pair_jumps: bool) -> AnsatzSpec {
    let mut channels = vec![ChannelSpec::shared(ChannelKind::Phaseflip)];
    if pair_jumps {
        channels.push(ChannelSpec::shared(ChannelKind::HeisenbergPair));
    }
    AnsatzSpec::alternating(model, layers, channels)
}

/// ZZ coupling then X field per layer, followed by depolarizing noise on every site.
pub fn depolarizing_circuit(n: usize, layers: usize) -> AnsatzSpec {
    AnsatzSpec::new(
        n,
        layers,
        vec![UnitaryTerm::Field(Pauli::X), UnitaryTerm::Coupling(Pauli::Z)],
        vec![ChannelSpec::shared(ChannelKind::Depolarizing)],
    )
}

/// Family commuting with the global spin flip.
pub fn symmetric_family(n: usize, layers: usize) -> AnsatzSpec {
    AnsatzSpec::new(n, layers, vec![UnitaryTerm::Coupling(Pauli::Z), UnitaryTerm::Field(Pauli::X)], vec![])
}

/// Same family with a Z field that breaks the spin flip.
pub fn nonsymmetric_family(n: usize, layers: usize) -> AnsatzSpec {
    AnsatzSpec::new(
        n,
        layers,
        vec![UnitaryTerm::Field(Pauli::Z), UnitaryTerm::Coupling(Pauli::Z), UnitaryTerm::Field(Pauli::X)],
        vec![],
    )
}

/// Index of the first layer's ZZ angle.
pub fn first_coupling_index(spec: &AnsatzSpec) -> Option<usize> {
    spec.terms.iter().position(|t| *t == UnitaryTerm::Coupling(Pauli::Z))
}
