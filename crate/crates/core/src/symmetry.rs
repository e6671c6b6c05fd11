//! Finite abelian symmetry groups, sector projectors and weak/strong channel symmetry.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channels::{KrausChannel, LindbladGenerator};
use crate::error::{invalid, Error, Result};
use crate::qcore::{
    c, identity, is_unitary, kron_all, max_abs, spectral_norm, trace, trace_product, DensityMatrix,
    Matrix, Pauli, PauliString, C64,
};

/// Default tolerance for symmetry verdicts.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

const GROUP_TOLERANCE: f64 = 1e-10;

/// A finite group given by a faithful unitary representation.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    elements: Vec<Matrix>,
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity_index: usize,
}

impl SymmetryGroup {
    /// Builds the multiplication table by matching products against the element list.
    pub fn new(elements: Vec<Matrix>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() {
            return invalid("group needs at least one element");
        }
        if labels.len() != elements.len() {
            return invalid("one label per group element required");
        }
        let d = elements[0].nrows();
        for (k, r) in elements.iter().enumerate() {
            if r.nrows() != d || !is_unitary(r, 1e-12) {
                return invalid(format!("element {} is not a {d}-dimensional unitary", labels[k]));
            }
        }
        let find = |m: &Matrix| elements.iter().position(|r| max_abs(&(r - m)) <= GROUP_TOLERANCE);
        let identity_index = find(&identity(d)).ok_or_else(|| Error::InvalidInput("group lacks the identity".into()))?;
        let mut table = vec![vec![0; elements.len()]; elements.len()];
        for (a, ra) in elements.iter().enumerate() {
            for (b, rb) in elements.iter().enumerate() {
                table[a][b] = find(&(ra * rb)).ok_or_else(|| {
                    Error::InvalidInput(format!("product {} * {} is not in the group", labels[a], labels[b]))
                })?;
            }
        }
        Ok(Self { elements, labels, table, identity_index })
    }

    /// Pauli-string elements such as `["111", "XXX", "X11", "1XX"]`.
    pub fn from_pauli_labels(labels: &[&str]) -> Result<Self> {
        let elements = labels
            .iter()
            .map(|l| PauliString::parse(l).map(|p| p.to_matrix()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements, labels.iter().map(|s| s.to_string()).collect())
    }

    /// `{I, X^{(x) n}}`.
    pub fn spin_flip(n: usize) -> Self {
        let flip = kron_all(vec![Pauli::X.matrix(); n].iter());
        Self::new(vec![identity(1 << n), flip], vec!["I".into(), "R".into()])
            .expect("spin flip group is valid")
    }

    /// Cyclic translations of an `n`-site ring.
    pub fn translations(n: usize) -> Self {
        let d = 1usize << n;
        let shift = |k: usize| {
            let mut m = Matrix::zeros(d, d);
            for x in 0..d {
                // bit of site s moves to site (s + k) mod n
                let mut y = 0usize;
                for s in 0..n {
                    if x >> (n - 1 - s) & 1 == 1 {
                        y |= 1 << (n - 1 - (s + k) % n);
                    }
                }
                m[(y, x)] = c(1.0, 0.0);
            }
            m
        };
        Self::new((0..n).map(shift).collect(), (0..n).map(|k| format!("T{k}")).collect())
            .expect("translation group is valid")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn identity_index(&self) -> usize {
        self.identity_index
    }

    pub fn product(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.table[a][b] == self.table[b][a]))
    }

    fn power(&self, g: usize, k: usize) -> usize {
        (0..k).fold(self.identity_index, |acc, _| self.table[acc][g])
    }
}

/// One-dimensional characters of an abelian group, one row per irrep.
#[derive(Clone, Debug, Serialize)]
pub struct CharacterTable {
    pub labels: Vec<String>,
    pub characters: Vec<Vec<C64>>,
}

impl CharacterTable {
    /// Validates that each row is a homomorphism and rows are orthonormal.
    pub fn new(group: &SymmetryGroup, characters: Vec<Vec<C64>>) -> Result<Self> {
        if !group.is_abelian() {
            return Err(Error::Unsupported("only abelian groups are supported".into()));
        }
        let g = group.order();
        if characters.len() != g || characters.iter().any(|row| row.len() != g) {
            return invalid(format!("an abelian group of order {g} needs a {g}x{g} character table"));
        }
        for (alpha, row) in characters.iter().enumerate() {
            for a in 0..g {
                for b in 0..g {
                    if (row[group.product(a, b)] - row[a] * row[b]).norm() > GROUP_TOLERANCE {
                        return invalid(format!("row {alpha} is not a one-dimensional representation"));
                    }
                }
            }
        }
        for (x, rx) in characters.iter().enumerate() {
            for (y, ry) in characters.iter().enumerate() {
                let inner: C64 = rx.iter().zip(ry).map(|(u, v)| u * v.conj()).sum::<C64>() / g as f64;
                let want = if x == y { 1.0 } else { 0.0 };
                if (inner - want).norm() > GROUP_TOLERANCE {
                    return invalid(format!("character rows {x} and {y} are not orthonormal"));
                }
            }
        }
        Ok(Self { labels: (0..g).map(|k| format!("chi{k}")).collect(), characters })
    }

    pub fn from_real(group: &SymmetryGroup, rows: &[&[f64]]) -> Result<Self> {
        Self::new(group, rows.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect())
    }

    /// Characters of an abelian group built by repeated cyclic extension of the trivial subgroup.
    pub fn abelian(group: &SymmetryGroup) -> Result<Self> {
        if !group.is_abelian() {
            return Err(Error::Unsupported("only abelian groups are supported".into()));
        }
        let e = group.identity_index();
        // characters as partial maps over the current subgroup
        let mut members = vec![e];
        let mut chars: Vec<Vec<Option<C64>>> = vec![{
            let mut row = vec![None; group.order()];
            row[e] = Some(c(1.0, 0.0));
            row
        }];
        while members.len() < group.order() {
            let g = (0..group.order()).find(|x| !members.contains(x)).expect("group not exhausted");
            let mut k = 1;
            while !members.contains(&group.power(g, k)) {
                k += 1;
            }
            let anchor = group.power(g, k);
            let mut next_members = Vec::with_capacity(members.len() * k);
            for j in 0..k {
                let gj = group.power(g, j);
                next_members.extend(members.iter().map(|&h| group.product(gj, h)));
            }
            let mut next_chars = Vec::with_capacity(chars.len() * k);
            for row in &chars {
                let target = row[anchor].expect("anchor in subgroup");
                let base = target.arg() / k as f64;
                for root in 0..k {
                    let r = C64::from_polar(1.0, base + 2.0 * PI * root as f64 / k as f64);
                    let mut new_row = vec![None; group.order()];
                    for j in 0..k {
                        let gj = group.power(g, j);
                        for &h in &members {
                            new_row[group.product(gj, h)] = Some(r.powu(j as u32) * row[h].expect("member"));
                        }
                    }
                    next_chars.push(new_row);
                }
            }
            members = next_members;
            chars = next_chars;
        }
        let characters = chars
            .into_iter()
            .map(|row| row.into_iter().map(|x| x.expect("complete row")).collect())
            .collect();
        Self::new(group, characters)
    }
}

/// `Pi_alpha = (1/|G|) sum_g chi_alpha(g) R_g`.
pub fn sector_projectors(group: &SymmetryGroup, table: &CharacterTable) -> Result<Vec<Matrix>> {
    if !group.is_abelian() {
        return Err(Error::Unsupported("only abelian groups are supported".into()));
    }
    let d = group.dim();
    let g = group.order() as f64;
    Ok(table
        .characters
        .iter()
        .map(|row| {
            row.iter()
                .zip(group.elements())
                .fold(Matrix::zeros(d, d), |acc, (chi, r)| acc + r * *chi)
                / c(g, 0.0)
        })
        .collect())
}

/// `p_alpha = Tr(Pi_alpha rho)`.
pub fn sector_populations(rho: &DensityMatrix, projectors: &[Matrix]) -> Vec<f64> {
    projectors.iter().map(|p| trace_product(p, rho.matrix()).re).collect()
}

/// Verdicts and residuals of a symmetry check.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub weakly_symmetric: bool,
    pub strongly_symmetric: bool,
    /// `theta(g)` in `[0, 2 pi)`, present only for strongly symmetric maps.
    pub phases: Option<Vec<f64>>,
    pub weak_residual: f64,
    pub strong_residual: f64,
    pub note: Option<String>,
}

fn conjugation_superoperator(r: &Matrix) -> Matrix {
    r.conjugate().kronecker(r)
}

fn weak_residual_of(superop: &Matrix, group: &SymmetryGroup) -> f64 {
    group
        .elements()
        .iter()
        .map(|r| {
            let u = conjugation_superoperator(r);
            spectral_norm(&(&u * superop * u.adjoint() - superop))
        })
        .fold(0.0, f64::max)
}

fn check_dims(dim: usize, group: &SymmetryGroup) -> Result<()> {
    if dim != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: dim });
    }
    Ok(())
}

/// True iff `R_g o E o R_g^dagger = E` for every element, compared as superoperators.
pub fn check_weak_symmetry(channel: &KrausChannel, group: &SymmetryGroup, tol: f64) -> Result<(bool, f64)> {
    check_dims(channel.dim(), group)?;
    let residual = weak_residual_of(&channel.superoperator(), group);
    Ok((residual <= tol, residual))
}

fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if (2.0 * PI - t) < 1e-9 {
        0.0
    } else {
        t
    }
}

/// Tests `R_g K_i R_g^dagger = exp(i theta(g)) K_i` with the phase anchored on the first Kraus operator.
pub fn check_strong_symmetry(channel: &KrausChannel, group: &SymmetryGroup, tol: f64) -> Result<SymmetryReport> {
    check_dims(channel.dim(), group)?;
    for (k, op) in channel.ops().iter().enumerate() {
        if op.norm() < 1e-14 {
            return invalid(format!("Kraus operator {k} has zero norm"));
        }
    }
    let (weak, weak_residual) = check_weak_symmetry(channel, group, tol)?;
    let anchor = &channel.ops()[0];
    let mut phases = Vec::with_capacity(group.order());
    let mut strong_residual: f64 = 0.0;
    for r in group.elements() {
        let rotated_anchor = r * anchor * r.adjoint();
        let overlap = trace(&(anchor.adjoint() * &rotated_anchor));
        let theta = if overlap.norm() < 1e-14 { 0.0 } else { overlap.arg() };
        let phase = C64::from_polar(1.0, theta);
        for k in channel.ops() {
            let diff = r * k * r.adjoint() - k * phase;
            strong_residual = strong_residual.max(spectral_norm(&diff));
        }
        phases.push(wrap_phase(theta));
    }
    let strong = strong_residual <= tol && weak;
    let note = (weak && !strong).then(|| {
        "fixed Kraus basis only; a rotated Kraus basis could still be strongly symmetric".to_string()
    });
    Ok(SymmetryReport {
        weakly_symmetric: weak,
        strongly_symmetric: strong,
        phases: strong.then_some(phases),
        weak_residual,
        strong_residual,
        note,
    })
}

/// Weak symmetry by superoperator commutation, strong symmetry by commutation of `H` and every jump.
pub fn check_lindblad_symmetry(generator: &LindbladGenerator, group: &SymmetryGroup, tol: f64) -> Result<SymmetryReport> {
    check_dims(generator.dim(), group)?;
    let weak_residual = weak_residual_of(&generator.superoperator(), group);
    let weak = weak_residual <= tol;
    let mut strong_residual: f64 = 0.0;
    for r in group.elements() {
        strong_residual = strong_residual.max(spectral_norm(&(r * &generator.hamiltonian - &generator.hamiltonian * r)));
        for l in &generator.jumps {
            strong_residual = strong_residual.max(spectral_norm(&(r * l - l * r)));
        }
    }
    let strong = strong_residual <= tol && weak;
    Ok(SymmetryReport {
        weakly_symmetric: weak,
        strongly_symmetric: strong,
        phases: strong.then(|| vec![0.0; group.order()]),
        weak_residual,
        strong_residual,
        note: None,
    })
}

/// Strong verdict of the first-order Kraus set of a generator, used to cross-check
/// [`check_lindblad_symmetry`].
pub fn small_time_strong_verdict(generator: &LindbladGenerator, group: &SymmetryGroup, dt: f64, tol: f64) -> Result<bool> {
    check_dims(generator.dim(), group)?;
    let ops: Vec<Matrix> = generator
        .small_time_kraus(dt)
        .into_iter()
        .filter(|k| k.norm() > 1e-14)
        .collect();
    let anchor = &ops[0];
    for r in group.elements() {
        let overlap = trace(&(anchor.adjoint() * r * anchor * r.adjoint()));
        let phase = C64::from_polar(1.0, overlap.arg());
        for k in &ops {
            // residual relative to the operator size so that sqrt(dt) scaling does not hide violations
            let scale = spectral_norm(k).max(1e-300);
            if spectral_norm(&(r * k * r.adjoint() - k * phase)) / scale > tol.max(1e-6) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Irrep permutation `alpha -> alpha~` with `chi_alpha~ = exp(i theta) chi_alpha`,
/// so that `p_alpha(E(rho)) = p_alpha~(rho)`.
pub fn sector_permutation(channel: &KrausChannel, group: &SymmetryGroup, table: &CharacterTable) -> Result<Vec<usize>> {
    let report = check_strong_symmetry(channel, group, SYMMETRY_TOLERANCE)?;
    let phases = report
        .phases
        .ok_or_else(|| Error::Precondition("channel is not strongly symmetric".into()))?;
    permutation_from_phases(&phases, table)
}

pub fn permutation_from_phases(phases: &[f64], table: &CharacterTable) -> Result<Vec<usize>> {
    table
        .characters
        .iter()
        .map(|row| {
            let shifted: Vec<C64> = row.iter().zip(phases).map(|(chi, &t)| chi * C64::from_polar(1.0, t)).collect();
            table
                .characters
                .iter()
                .position(|other| other.iter().zip(&shifted).all(|(a, b)| (a - b).norm() < 1e-8))
                .ok_or_else(|| Error::Precondition("phases do not map characters onto characters".into()))
        })
        .collect()
}

/// The four-element group `{111, XXX, X11, 1XX}` with its real character table.
pub fn four_element_example() -> (SymmetryGroup, CharacterTable) {
    let group = SymmetryGroup::from_pauli_labels(&["111", "XXX", "X11", "1XX"]).expect("valid group");
    let table = CharacterTable::from_real(
        &group,
        &[&[1.0, 1.0, 1.0, 1.0], &[1.0, -1.0, -1.0, 1.0], &[1.0, 1.0, -1.0, -1.0], &[1.0, -1.0, 1.0, -1.0]],
    )
    .expect("valid table");
    (group, table)
}
