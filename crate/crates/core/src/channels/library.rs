use serde::{Deserialize, Serialize};

use super::{outer, scaled, KrausChannel, LindbladGenerator};
use crate::error::{invalid, Error, Result};
use crate::qcore::{c, identity, kron, Matrix, Pauli, C64};

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("{what} must lie in [0, 1], got {p}"));
    }
    Ok(())
}

/// `{sqrt(1-p) I, sqrt(p) P}`.
pub fn pauli_channel(pauli: Pauli, p: f64) -> Result<KrausChannel> {
    check_probability(p, "flip probability")?;
    KrausChannel::new(vec![scaled(&identity(2), (1.0 - p).sqrt()), scaled(&pauli.matrix(), p.sqrt())])
}

pub fn bitflip(p: f64) -> Result<KrausChannel> {
    pauli_channel(Pauli::X, p)
}

pub fn phaseflip(p: f64) -> Result<KrausChannel> {
    pauli_channel(Pauli::Z, p)
}

/// `(1 - lambda) rho + lambda I / 2` in four-Kraus form.
pub fn depolarizing(lambda: f64) -> Result<KrausChannel> {
    check_probability(lambda, "depolarizing strength")?;
    let w = (lambda / 4.0).sqrt();
    KrausChannel::new(vec![
        scaled(&identity(2), (1.0 - 3.0 * lambda / 4.0).sqrt()),
        scaled(&Pauli::X.matrix(), w),
        scaled(&Pauli::Y.matrix(), w),
        scaled(&Pauli::Z.matrix(), w),
    ])
}

/// Strength of `m` composed depolarizing channels of strength `lambda`.
pub fn composed_depolarizing_strength(lambda: f64, m: usize) -> f64 {
    1.0 - (1.0 - lambda).powi(m as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PauliChannelKind {
    Bitflip,
    Phaseflip,
    Depolarizing,
}

pub fn pauli_channel_of(kind: PauliChannelKind, p: f64) -> Result<KrausChannel> {
    match kind {
        PauliChannelKind::Bitflip => bitflip(p),
        PauliChannelKind::Phaseflip => phaseflip(p),
        PauliChannelKind::Depolarizing => depolarizing(p),
    }
}

/// Two-qubit pump into the aligned bond subspace `span{|00>, |11>}`.
///
/// Kraus set `{sqrt(1-p) I, sqrt(p) P, sqrt(p) T}` with `P = |00><00| + |11><11|`
/// and `T = |00><01| + |11><10|`.
pub fn ising_projector_channel(p: f64) -> Result<KrausChannel> {
    check_probability(p, "projector probability")?;
    let proj = outer(0, 0, 4) + outer(3, 3, 4);
    let transfer = outer(0, 1, 4) + outer(3, 2, 4);
    KrausChannel::new(vec![
        scaled(&identity(4), (1.0 - p).sqrt()),
        scaled(&proj, p.sqrt()),
        scaled(&transfer, p.sqrt()),
    ])
}

/// Single-qubit heating generator with jump `sqrt(p) (Z + q Y)`.
pub fn tfim_jump(p: f64, q: f64) -> Result<LindbladGenerator> {
    tfim_jump_with(p, q, false)
}

/// With `conjugated` the jump is the Hadamard-rotated `sqrt(p) (X - q Y)`.
pub fn tfim_jump_with(p: f64, q: f64, conjugated: bool) -> Result<LindbladGenerator> {
    if !(p >= 0.0) || !q.is_finite() {
        return invalid(format!("tfim jump needs p >= 0 and finite q, got p={p}, q={q}"));
    }
    let jump = if conjugated {
        Pauli::X.matrix() - scaled(&Pauli::Y.matrix(), q)
    } else {
        Pauli::Z.matrix() + scaled(&Pauli::Y.matrix(), q)
    };
    LindbladGenerator::dissipative(vec![scaled(&jump, p.sqrt())])
}

/// Two-qubit jumps aligning (`kappa_f`) or antialigning (`kappa_af`) neighbouring spins.
pub fn heisenberg_pair_jumps(kappa_f: f64, kappa_af: f64) -> Result<LindbladGenerator> {
    if !(kappa_f >= 0.0) || !(kappa_af >= 0.0) {
        return invalid(format!("pair rates must be non-negative, got {kappa_f}, {kappa_af}"));
    }
    let (sf, saf) = (kappa_f.sqrt(), kappa_af.sqrt());
    // basis index 2*a + b for |ab>
    let l0 = scaled(&outer(3, 2, 4), sf) + scaled(&outer(1, 0, 4), saf);
    let l1 = scaled(&outer(0, 1, 4), sf) + scaled(&outer(2, 3, 4), saf);
    LindbladGenerator::dissipative(vec![l0, l1])
}

/// `X (x) X`, the spin flip on a bond.
pub fn bond_flip() -> Matrix {
    kron(&Pauli::X.matrix(), &Pauli::X.matrix())
}

/// Effective pair rates and the diagonal of the induced Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveRates {
    pub sqrt_kappa_f: C64,
    pub sqrt_kappa_af: C64,
    pub kappa_f: f64,
    pub kappa_af: f64,
    /// Coefficients of `|00><00|` and `|10><10|`.
    pub h_eff_diag: [f64; 2],
}

/// Rates of the pair jumps from the drive `omega`, coupling `g`, detunings and decay `kappa`.
pub fn effective_rates_from_physical(
    g: f64,
    omega: f64,
    delta_tilde: C64,
    big_delta: f64,
    kappa: f64,
) -> Result<EffectiveRates> {
    if !(kappa > 0.0) {
        return invalid(format!("kappa must be positive, got {kappa}"));
    }
    if g == 0.0 {
        return invalid("coupling g must be non-zero");
    }
    let tol = 1e-12;
    let g2 = c(g * g, 0.0);
    let den_f = delta_tilde * big_delta - g2;
    let den_af = delta_tilde * big_delta * big_delta - g2 * (2.0 * big_delta);
    if den_f.norm() <= tol * (g * g).max(1.0) {
        return Err(Error::Singular("delta_tilde * Delta = g^2 makes kappa_f diverge".into()));
    }
    if den_af.norm() <= tol * (g * g * big_delta.abs()).max(1.0) {
        return Err(Error::Singular("delta_tilde * Delta^2 = 2 g^2 Delta makes kappa_af diverge".into()));
    }
    let ratio_f = delta_tilde / den_f;
    let ratio_af = den_f / den_af;
    let pre = kappa.sqrt() * omega / 2.0;
    let sqrt_kappa_f = ratio_f * pre;
    let sqrt_kappa_af = ratio_af * pre;
    let quarter = (omega / 2.0).powi(2);
    Ok(EffectiveRates {
        sqrt_kappa_f,
        sqrt_kappa_af,
        kappa_f: sqrt_kappa_f.norm_sqr(),
        kappa_af: sqrt_kappa_af.norm_sqr(),
        h_eff_diag: [quarter * 2.0 * ratio_f.re, quarter * 2.0 * ratio_af.re],
    })
}
