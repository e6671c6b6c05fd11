mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use thermalizer::channels::{heisenberg_pair_jumps, ising_projector_channel, KrausChannel};
use thermalizer::entropy::{scaled_subsystem_entropy, variational_entropy_bound, Disentangler, VariationalOptions};
use thermalizer::models::{free_energy, gibbs_state, SpinModel};
use thermalizer::qcore::{
    c, hermitian_function, max_abs, random, von_neumann_entropy, DensityMatrix, Matrix, Pauli, PauliString,
};
use thermalizer::qoft::{
    exact_filtered_jump, filter_transform, gamma_weight, quadrature_filtered_jump, verify_jump_inequality,
    QUADRATURE_NODES,
};
use thermalizer::symmetry::{
    check_lindblad_symmetry, check_strong_symmetry, four_element_example, sector_permutation, sector_projectors,
    sector_populations, CharacterTable, SymmetryGroup, SYMMETRY_TOLERANCE,
};
use thermalizer::vqt::{
    train, AnsatzSpec, ChannelKind, ChannelSpec, ParameterVector, Sharing, TrainConfig, UnitaryTerm,
};

fn ok(check: Check) -> Result<(), TestCaseError> {
    check.map_err(TestCaseError::fail)
}

fn in_bounds(spec: &AnsatzSpec, seed: u64) -> ParameterVector {
    let mut r = rng(seed);
    ParameterVector {
        theta: (0..spec.theta_count()).map(|_| r.random::<f64>() * 6.3).collect(),
        lambda: spec.lambda_bounds().iter().map(|(lo, hi)| lo + (hi - lo) * r.random::<f64>()).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn channels_preserve_trace(seed in any::<u64>(), n in 1usize..=4) {
        ok(check_trace_preservation(seed, n))?;
    }

    #[test]
    fn channels_are_completely_positive(seed in any::<u64>(), n in 1usize..=3) {
        ok(check_choi_positive(seed, n))?;
    }

    #[test]
    fn entropy_is_subadditive(seed in any::<u64>(), n in 2usize..=6) {
        ok(check_subadditivity(seed, n))?;
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..=6) {
        ok(check_unitary_invariance(seed, n))?;
    }

    #[test]
    fn lindblad_evolution_is_a_semigroup(seed in any::<u64>(), n in 1usize..=3) {
        ok(check_semigroup(seed, n))?;
    }

    #[test]
    fn weakly_symmetric_outputs_commute(seed in any::<u64>(), n in 1usize..=4) {
        ok(check_weak_symmetry_commutation(seed, n))?;
    }

    #[test]
    fn partial_trace_recovers_factor(seed in any::<u64>(), n in 2usize..=6) {
        ok(check_partial_trace_of_product(seed, n))?;
    }

    #[test]
    fn exp_log_round_trip(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let rho = random::random_density_matrix(n, &mut r).into_matrix() + Matrix::identity(1 << n, 1 << n) * c(0.1, 0.0);
        let log = hermitian_function(&rho, f64::ln).unwrap();
        let back = hermitian_function(&log, f64::exp).unwrap();
        prop_assert!(max_abs(&(back - rho)) < 1e-8);
    }

    #[test]
    fn gibbs_state_minimises_free_energy(seed in any::<u64>(), beta in 0.05f64..4.0) {
        let h = SpinModel::tfim(3).hamiltonian().unwrap();
        let g = gibbs_state(&h, beta).unwrap();
        let f_g = free_energy(&g.state, &h, beta, g.entropy).unwrap();
        let mut r = rng(seed);
        for _ in 0..100 {
            let eps = 0.02 + 0.5 * r.random::<f64>();
            let other = random::random_density_matrix(3, &mut r);
            let mix = DensityMatrix::new(g.state.matrix() * c(1.0 - eps, 0.0) + other.matrix() * c(eps, 0.0)).unwrap();
            let f = free_energy(&mix, &h, beta, von_neumann_entropy(&mix)).unwrap();
            prop_assert!(f_g < f, "F(gibbs)={f_g} >= F(sample)={f}");
        }
    }

    #[test]
    fn gibbs_state_shares_the_spin_flip(beta in 0.0f64..5.0, n in 3usize..=5) {
        for model in [SpinModel::tfim(n), SpinModel::heisenberg(n, 0.7)] {
            let g = gibbs_state(&model.hamiltonian().unwrap(), beta).unwrap();
            let r = PauliString::parse(&"X".repeat(n)).unwrap().to_matrix();
            prop_assert!(max_abs(&(&r * g.state.matrix() - g.state.matrix() * &r)) < 1e-10);
            let z: f64 = g.energies.iter().map(|e| (-beta * e).exp()).sum();
            prop_assert!((g.partition_function() - z).abs() <= 1e-10 * z);
        }
    }

    #[test]
    fn strong_symmetry_preserves_populations(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let group = SymmetryGroup::spin_flip(n);
        let table = CharacterTable::abelian(&group).unwrap();
        let proj = sector_projectors(&group, &table).unwrap();
        let ch = symmetric_unitary_mixture(&group, 3, &mut r);
        let report = check_strong_symmetry(&ch, &group, SYMMETRY_TOLERANCE).unwrap();
        prop_assert!(report.strongly_symmetric && report.weakly_symmetric);
        let rho = random::random_density_matrix(n, &mut r);
        let before = sector_populations(&rho, &proj);
        let after = sector_populations(&ch.apply(&rho).unwrap(), &proj);
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn z_pair_channel_permutes_populations(seed in any::<u64>(), p in 0.05f64..0.95) {
        let (group, table) = four_element_example();
        let op = |label: &str, w: f64| PauliString::parse(label).unwrap().to_matrix() * c(w.sqrt(), 0.0);
        let ch = KrausChannel::new(vec![op("Z11", 1.0 - p), op("ZZZ", p)]).unwrap();
        let report = check_strong_symmetry(&ch, &group, SYMMETRY_TOLERANCE).unwrap();
        prop_assert!(report.strongly_symmetric);
        let phases = report.phases.unwrap();
        for a in 0..group.order() {
            for b in 0..group.order() {
                let lhs = phases[group.product(a, b)];
                let rhs = phases[a] + phases[b];
                let gap = (lhs - rhs).rem_euclid(2.0 * std::f64::consts::PI);
                prop_assert!(gap.min(2.0 * std::f64::consts::PI - gap) < 1e-8);
            }
        }
        let perm = sector_permutation(&ch, &group, &table).unwrap();
        let proj = sector_projectors(&group, &table).unwrap();
        let rho = random::random_density_matrix(3, &mut rng(seed));
        let before = sector_populations(&rho, &proj);
        let mut after = sector_populations(&ch.apply(&rho).unwrap(), &proj);
        for (alpha, &src) in perm.iter().enumerate() {
            prop_assert!((after[alpha] - before[src]).abs() < 1e-8);
        }
        let mut sorted = before.clone();
        sorted.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for (a, b) in sorted.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn strong_implies_weak(seed in any::<u64>()) {
        let mut r = rng(seed);
        let group = SymmetryGroup::spin_flip(2);
        for ch in [random_channel(4, 2, &mut r), twirled_channel(&random_channel(4, 2, &mut r), &group), symmetric_unitary_mixture(&group, 2, &mut r)] {
            let report = check_strong_symmetry(&ch, &group, SYMMETRY_TOLERANCE).unwrap();
            prop_assert!(!report.strongly_symmetric || report.weakly_symmetric);
        }
    }

    #[test]
    fn heisenberg_pair_is_weak_not_strong(kf in 0.05f64..3.0, kaf in 0.05f64..3.0) {
        let report = check_lindblad_symmetry(&heisenberg_pair_jumps(kf, kaf).unwrap(), &SymmetryGroup::spin_flip(2), SYMMETRY_TOLERANCE).unwrap();
        prop_assert!(report.weakly_symmetric && !report.strongly_symmetric);
    }

    #[test]
    fn projector_fixes_aligned_states(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut r = rng(seed);
        // random state on span{|00>, |11>}
        let a = random::ginibre(2, 2, &mut r);
        let small = &a * a.adjoint();
        let small = &small * c(1.0 / small.trace().re, 0.0);
        let mut rho = Matrix::zeros(4, 4);
        for (i, &bi) in [0usize, 3].iter().enumerate() {
            for (j, &bj) in [0usize, 3].iter().enumerate() {
                rho[(bi, bj)] = small[(i, j)];
            }
        }
        let out = ising_projector_channel(p).unwrap().apply_matrix(&rho);
        prop_assert!(max_abs(&(out - rho)) < 1e-12);
    }

    #[test]
    fn variational_bound_is_an_upper_bound(seed in any::<u64>()) {
        let spec = AnsatzSpec::new(3, 1, vec![UnitaryTerm::Field(Pauli::X), UnitaryTerm::Coupling(Pauli::Z)], vec![ChannelSpec::shared(ChannelKind::Depolarizing)]);
        let params = in_bounds(&spec, seed);
        let rho = spec.compile().unwrap().evaluate(&params).unwrap();
        let dis = Disentangler::inverse_of(&spec, &params, None).unwrap();
        let partition: Vec<Vec<usize>> = (0..3).map(|s| vec![s]).collect();
        let est = variational_entropy_bound(&rho, &partition, &dis, &VariationalOptions { max_evaluations: 200, ftol: 1e-8 }).unwrap();
        prop_assert!(est.value >= von_neumann_entropy(&rho) - 1e-9);
    }

    #[test]
    fn scaled_entropy_exact_for_product_circuits(seed in any::<u64>(), n in 3usize..=6, n_a in 2usize..=3) {
        let spec = AnsatzSpec::new(n, 2, vec![UnitaryTerm::Field(Pauli::X), UnitaryTerm::Field(Pauli::Y)], vec![ChannelSpec::shared(ChannelKind::Phaseflip)]);
        let mut params = in_bounds(&spec, seed);
        params.lambda.iter_mut().for_each(|l| *l = 0.0);
        let est = scaled_subsystem_entropy(&spec, &params, n_a).unwrap();
        let exact = von_neumann_entropy(&spec.compile().unwrap().evaluate(&params).unwrap());
        prop_assert!((est.value - exact).abs() <= 1e-9);
    }

    #[test]
    fn ansatz_outputs_are_states(seed in any::<u64>(), n in 2usize..=4) {
        let model = SpinModel::heisenberg(n.max(3), 0.5);
        let spec = AnsatzSpec::alternating(&model, 2, vec![
            ChannelSpec::shared(ChannelKind::Bitflip),
            ChannelSpec { kind: ChannelKind::TfimJump, sharing: Sharing::PerSite },
            ChannelSpec::shared(ChannelKind::HeisenbergPair),
        ]);
        let rho = spec.compile().unwrap().evaluate(&in_bounds(&spec, seed)).unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(rho.eigenvalues().iter().all(|&v| v > -1e-10));
    }

    #[test]
    fn weak_ansatz_output_commutes(seed in any::<u64>(), n in 3usize..=5) {
        let spec = AnsatzSpec::alternating(&SpinModel::tfim(n), 2, vec![ChannelSpec::shared(ChannelKind::Phaseflip), ChannelSpec::shared(ChannelKind::TfimJump)]);
        let rho = spec.compile().unwrap().evaluate(&in_bounds(&spec, seed)).unwrap();
        let r = PauliString::parse(&"X".repeat(n)).unwrap().to_matrix();
        prop_assert!(max_abs(&(&r * rho.matrix() - rho.matrix() * &r)) < 1e-9);
    }

    #[test]
    fn strong_ansatz_keeps_sector_populations(seed in any::<u64>(), n in 3usize..=5) {
        let spec = AnsatzSpec::alternating(&SpinModel::tfim(n), 2, vec![ChannelSpec::shared(ChannelKind::Bitflip)]);
        let rho = spec.compile().unwrap().evaluate(&in_bounds(&spec, seed)).unwrap();
        let group = SymmetryGroup::spin_flip(n);
        let proj = sector_projectors(&group, &CharacterTable::abelian(&group).unwrap()).unwrap();
        let pops = sector_populations(&rho, &proj);
        let initial = sector_populations(&DensityMatrix::plus_state(n), &proj);
        for (a, b) in pops.iter().zip(&initial) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn spectral_jump_matches_quadrature(seed in any::<u64>(), omega in -5.0f64..5.0) {
        let mut r = rng(seed);
        let h = random::random_hermitian(4, &mut r);
        let a = random::random_hermitian(4, &mut r);
        let beta = 0.05;
        let closed = exact_filtered_jump(&h, &a, omega, beta).unwrap();
        let quad = quadrature_filtered_jump(&h, &a, omega, beta, QUADRATURE_NODES).unwrap();
        prop_assert!(max_abs(&(closed - quad)) < 1e-6);
    }

    #[test]
    fn jump_inequality_holds_at_high_temperature(seed in any::<u64>(), bh in 0.001f64..0.1) {
        let mut r = rng(seed);
        let h = random::random_hermitian(4, &mut r) * c(0.5 + r.random::<f64>(), 0.0);
        let a = random::random_hermitian(4, &mut r);
        let beta = bh / thermalizer::qcore::spectral_norm(&h);
        let grid: Vec<f64> = (0..41).map(|k| -5.0 + 0.25 * k as f64).collect();
        let report = verify_jump_inequality(&h, &a, beta, &grid).unwrap();
        prop_assert!(report.all_pass, "{:?}", report.failures());
    }

    #[test]
    fn filter_parities(x in -20.0f64..20.0, beta in 0.01f64..3.0) {
        prop_assert_eq!(filter_transform(x, beta), filter_transform(-x, beta));
        // gamma is not even: gamma(x) / gamma(-x) = exp(-2 beta x)
        let y = x / (1.0 + beta * x.abs() / 4.0);
        let ratio = gamma_weight(y, beta) / gamma_weight(-y, beta);
        prop_assert!((ratio / (-2.0 * beta * y).exp() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn training_is_bitwise_reproducible() {
    let model = SpinModel::tfim(3);
    let spec = AnsatzSpec::alternating(&model, 1, vec![ChannelSpec::shared(ChannelKind::Phaseflip)]);
    let h = model.hamiltonian().unwrap();
    let cfg = TrainConfig { restarts: 2, max_iters: 30, seed: 11, ..Default::default() };
    let a = train(&spec, &h, 0.7, &cfg).unwrap();
    let b = train(&spec, &h, 0.7, &cfg).unwrap();
    assert_eq!(a, b);
}
