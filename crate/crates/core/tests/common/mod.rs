//! Seeded invariant checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermalizer::channels::{KrausChannel, LindbladGenerator};
use thermalizer::qcore::{
    c, hermitian_eigenvalues, kron, max_abs, partial_trace, random, unitary_evolution, von_neumann_entropy,
    DensityMatrix, Matrix,
};
use thermalizer::symmetry::SymmetryGroup;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stinespring construction: `K_i` is the `i`-th `d x d` block of the first `d` columns of a Haar unitary.
pub fn random_channel(d: usize, kraus: usize, rng: &mut ChaCha8Rng) -> KrausChannel {
    let u = random::random_unitary(d * kraus, rng);
    let ops = (0..kraus).map(|i| u.view((i * d, 0), (d, d)).into_owned()).collect();
    KrausChannel::new(ops).expect("isometry blocks are complete")
}

pub fn random_generator(d: usize, jumps: usize, rng: &mut ChaCha8Rng) -> LindbladGenerator {
    let h = random::random_hermitian(d, rng);
    let ls = (0..jumps).map(|_| random::ginibre(d, d, rng) * c(0.5, 0.0)).collect();
    LindbladGenerator::new(h, ls).expect("valid generator")
}

/// Group-averaged channel `(1/|G|) sum_g R_g E(R_g^dagger . R_g) R_g^dagger`, weakly symmetric by construction.
pub fn twirled_channel(channel: &KrausChannel, group: &SymmetryGroup) -> KrausChannel {
    let w = c((group.order() as f64).recip().sqrt(), 0.0);
    let ops = group
        .elements()
        .iter()
        .flat_map(|r| channel.ops().iter().map(move |k| r * k * r.adjoint() * w))
        .collect();
    KrausChannel::new(ops).expect("twirl keeps completeness")
}

/// `(1/|G|) sum_g R_g rho R_g^dagger`.
pub fn twirled_state(rho: &DensityMatrix, group: &SymmetryGroup) -> DensityMatrix {
    let d = rho.dim();
    let sum = group
        .elements()
        .iter()
        .fold(Matrix::zeros(d, d), |acc, r| acc + r * rho.matrix() * r.adjoint());
    DensityMatrix::new(sum * c(1.0 / group.order() as f64, 0.0)).expect("mixture of states")
}

/// Mixture of unitaries generated by group-invariant Hamiltonians; strongly symmetric with zero phases.
pub fn symmetric_unitary_mixture(group: &SymmetryGroup, terms: usize, rng: &mut ChaCha8Rng) -> KrausChannel {
    let d = group.dim();
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 0.1).collect();
    let total: f64 = weights.iter().sum();
    let ops = weights
        .iter()
        .map(|w| {
            let h = random::random_hermitian(d, rng);
            let sym = group
                .elements()
                .iter()
                .fold(Matrix::zeros(d, d), |acc, r| acc + r * &h * r.adjoint())
                * c(1.0 / group.order() as f64, 0.0);
            unitary_evolution(&sym, 1.0).expect("hermitian") * c((w / total).sqrt(), 0.0)
        })
        .collect();
    KrausChannel::new(ops).expect("unitary mixture")
}

pub fn check_trace_preservation(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let d = 1 << n;
    let ch = random_channel(d, 1 + (seed % 3) as usize, &mut r);
    if ch.completeness_defect() > 1e-10 {
        return Err(format!("completeness defect {}", ch.completeness_defect()));
    }
    let rho = random::random_density_matrix(n, &mut r);
    let out = ch.apply_matrix(rho.matrix());
    let tr = out.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(format!("output trace {tr}"));
    }
    Ok(())
}

pub fn check_choi_positive(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let d = 1 << n;
    let ch = random_channel(d, 2, &mut r);
    let gen = random_generator(d, 2, &mut r).channel(0.3).map_err(|e| e.to_string())?;
    for (name, channel) in [("kraus", ch), ("lindblad", gen)] {
        let choi = channel.choi();
        let min = hermitian_eigenvalues(&((&choi + choi.adjoint()) * c(0.5, 0.0)))
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(format!("{name} Choi eigenvalue {min}"));
        }
        if channel.completeness_defect() > 1e-10 {
            return Err(format!("{name} completeness defect {}", channel.completeness_defect()));
        }
    }
    Ok(())
}

pub fn check_subadditivity(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let rho = random::random_density_matrix(n, &mut r);
    let split = 1 + (seed as usize % (n - 1));
    let a: Vec<usize> = (0..split).collect();
    let b: Vec<usize> = (split..n).collect();
    let s = von_neumann_entropy(&rho);
    let sa = von_neumann_entropy(&partial_trace(&rho, &a).map_err(|e| e.to_string())?);
    let sb = von_neumann_entropy(&partial_trace(&rho, &b).map_err(|e| e.to_string())?);
    if s > sa + sb + 1e-9 {
        return Err(format!("S(AB)={s} > S(A)+S(B)={}", sa + sb));
    }
    Ok(())
}

pub fn check_unitary_invariance(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let rho = random::random_density_matrix(n, &mut r);
    let u = random::random_unitary(1 << n, &mut r);
    let rotated = DensityMatrix::new(&u * rho.matrix() * u.adjoint()).map_err(|e| e.to_string())?;
    let diff = (von_neumann_entropy(&rotated) - von_neumann_entropy(&rho)).abs();
    if diff > 1e-9 {
        return Err(format!("entropy changed by {diff}"));
    }
    Ok(())
}

pub fn check_semigroup(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let gen = random_generator(1 << n, 2, &mut r);
    let rho = random::random_density_matrix(n, &mut r);
    let (t1, t2) = (r.random::<f64>() * 0.8, r.random::<f64>() * 0.8);
    let composed = gen.evolve_matrix(&gen.evolve_matrix(rho.matrix(), t1), t2);
    let direct = gen.evolve_matrix(rho.matrix(), t1 + t2);
    let err = max_abs(&(composed - direct));
    if err > 1e-9 {
        return Err(format!("semigroup defect {err} at t1={t1}, t2={t2}"));
    }
    Ok(())
}

pub fn check_weak_symmetry_commutation(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let group = SymmetryGroup::spin_flip(n);
    let ch = twirled_channel(&random_channel(1 << n, 2, &mut r), &group);
    let rho = twirled_state(&random::random_density_matrix(n, &mut r), &group);
    let out = ch.apply_matrix(rho.matrix());
    for g in group.elements() {
        let comm = max_abs(&(g * &out - &out * g));
        if comm > 1e-9 {
            return Err(format!("[R, E(rho)] = {comm}"));
        }
    }
    Ok(())
}

pub fn check_partial_trace_of_product(seed: u64, n: usize) -> Check {
    let mut r = rng(seed);
    let na = 1 + (seed as usize % (n - 1));
    let a = random::random_density_matrix(na, &mut r);
    let b = random::random_density_matrix(n - na, &mut r);
    let joint = DensityMatrix::new(kron(a.matrix(), b.matrix())).map_err(|e| e.to_string())?;
    let keep: Vec<usize> = (0..na).collect();
    let back = partial_trace(&joint, &keep).map_err(|e| e.to_string())?;
    let err = max_abs(&(back.matrix() - a.matrix()));
    if err > 1e-12 {
        return Err(format!("Tr_B(rho_A x rho_B) differs by {err}"));
    }
    Ok(())
}

/// Named criterion-8 invariants with the largest register they are run at.
pub const CORE_INVARIANTS: [(&str, fn(u64, usize) -> Check, usize); 6] = [
    ("trace preservation", check_trace_preservation, 4),
    ("CP Choi check", check_choi_positive, 3),
    ("subadditivity", check_subadditivity, 6),
    ("unitary invariance of entropy", check_unitary_invariance, 6),
    ("semigroup property", check_semigroup, 3),
    ("weak-symmetry commutation", check_weak_symmetry_commutation, 4),
];
