//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line to stderr, uncaptured.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use thermalizer::harness::presets::{
    first_coupling_index, heisenberg_ansatz, ising_ansatz, nonsymmetric_family, single_channel_ansatz,
    symmetric_family,
};
use thermalizer::harness::{entropy_bench_samples, slope_betas, summarize_entropy_bench, symmetry_case, SymmetryCase};
use thermalizer::models::SpinModel;
use thermalizer::qcore::{max_abs, random, spectral_norm, PauliString};
use thermalizer::qoft::{integrated_bound_slope, linspace, quadrature_filtered_jump, verify_jump_inequality, BohrDecomposition, QUADRATURE_NODES};
use thermalizer::symmetry::SYMMETRY_TOLERANCE;
use thermalizer::vqt::{gradient_variance_study, train, AnsatzSpec, ChannelKind, TrainConfig};

fn report(id: &str, pass: bool, detail: impl AsRef<str>) -> bool {
    let line = format!("{} [{id}] {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
    // bypasses the test harness capture so every verdict reaches the log
    let _ = writeln!(std::io::stderr(), "{line}");
    pass
}

fn trained_fidelity(spec: &AnsatzSpec, model: &SpinModel, beta: f64) -> f64 {
    let h = model.hamiltonian().unwrap();
    let config = TrainConfig { restarts: 5, ..Default::default() };
    train(spec, &h, beta, &config).unwrap().final_fidelity.expect("fidelity reported at n <= 10")
}

// layers needed for the trained fidelity to clear its threshold at every beta
const ISING_LAYERS: usize = 4;
const TFIM_LAYERS: usize = 6;

fn fmt_pairs(xs: &[(f64, f64)]) -> String {
    xs.iter().map(|(b, f)| format!("beta={b}: {f:.4}")).collect::<Vec<_>>().join(", ")
}

#[test]
fn criterion_1_ising_fidelity() {
    let model = SpinModel::ising(6);
    let spec = ising_ansatz(&model, ISING_LAYERS);
    let fids: Vec<(f64, f64)> =
        [0.2, 0.5, 1.0, 2.0, 5.0].iter().map(|&b| (b, trained_fidelity(&spec, &model, b))).collect();
    let pass = fids.iter().all(|(_, f)| *f >= 0.99);
    assert!(report("1", pass, format!("Ising n=6 m={ISING_LAYERS} projector ansatz, fidelity >= 0.99: {}", fmt_pairs(&fids))));
}

#[test]
fn criterion_2_symmetry_sector_ceiling() {
    let model = SpinModel::tfim(6);
    let bit = single_channel_ansatz(&model, TFIM_LAYERS, ChannelKind::Bitflip);
    let phase = single_channel_ansatz(&model, TFIM_LAYERS, ChannelKind::Phaseflip);
    let bit0 = trained_fidelity(&bit, &model, 0.0);
    let phase0 = trained_fidelity(&phase, &model, 0.0);
    let phase3 = trained_fidelity(&phase, &model, 3.0);
    let pass = bit0 <= 0.55 && phase0 >= 0.95 && phase3 >= 0.95;
    assert!(report(
        "2",
        pass,
        format!(
            "TFIM n=6 m={TFIM_LAYERS}: beta=0 bitflip {bit0:.4} (<= 0.55), phaseflip {phase0:.4} (>= 0.95); beta=3 phaseflip {phase3:.4} (>= 0.95)"
        )
    ));
}

#[test]
fn criterion_2_bitflip_low_temperature() {
    let model = SpinModel::tfim(6);
    let bit = single_channel_ansatz(&model, TFIM_LAYERS, ChannelKind::Bitflip);
    let f = trained_fidelity(&bit, &model, 3.0);
    assert!(report("2-low-T", f >= 0.95, format!("TFIM n=6 m={TFIM_LAYERS} beta=3 bitflip fidelity {f:.4} (>= 0.95)")));
}

#[test]
fn criterion_3_entropy_error_scaling() {
    let n = if std::env::var("THERMALIZER_ACCEPTANCE_N12").is_ok() { 12 } else { 10 };
    let (lambda, m) = (0.05, 10);
    let n_a: Vec<usize> = (3..=8).collect();
    let seeds: Vec<u64> = (0..20).collect();
    let samples = entropy_bench_samples(n, &n_a, lambda, m, &seeds).unwrap();
    let summary = summarize_entropy_bench(n, &n_a, lambda, m, &samples).unwrap();
    let within = summary.iter().all(|s| s.ratio >= 1.0 / 3.0 && s.ratio <= 3.0);
    let decreasing = summary.windows(2).all(|w| {
        let sigma = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        w[1].mean_rel_error < w[0].mean_rel_error + 2.0 * sigma
    });
    let detail = summary
        .iter()
        .map(|s| format!("n_a={} err={:.3e} pred={:.3e} ratio={:.3}", s.n_a, s.mean_rel_error, s.predicted, s.ratio))
        .collect::<Vec<_>>()
        .join("; ");
    let pass = within && decreasing;
    assert!(report(
        "3",
        pass,
        format!("n={n}, 20 seeds, factor-3 band {within}, decreasing within 2 sigma {decreasing}: {detail}")
    ));
}

#[test]
fn criterion_4_symmetry_classification() {
    let tol = SYMMETRY_TOLERANCE;
    let bit = symmetry_case(SymmetryCase::Bitflip, 0.3, 0.0, tol).unwrap();
    let phase = symmetry_case(SymmetryCase::Phaseflip, 0.3, 0.0, tol).unwrap();
    let pair = symmetry_case(SymmetryCase::ZPair, 0.4, 0.0, tol).unwrap();
    let heis = symmetry_case(SymmetryCase::HeisenbergPair, 0.7, 0.3, tol).unwrap();
    let phases_ok = pair.report.phases.as_ref().is_some_and(|p| {
        p.len() == 4 && p.iter().zip([0.0, PI, PI, 0.0]).all(|(a, b)| (a - b).abs() < 1e-8)
    });
    let pass = bit.report.strongly_symmetric
        && phase.report.weakly_symmetric
        && !phase.report.strongly_symmetric
        && pair.report.strongly_symmetric
        && phases_ok
        && pair.permutation == Some(vec![1, 0, 3, 2])
        && heis.report.weakly_symmetric
        && !heis.report.strongly_symmetric;
    assert!(report(
        "4",
        pass,
        format!(
            "bitflip strong={}, phaseflip weak={} strong={}, Z-pair strong={} phases={:?} permutation={:?}, Heisenberg pair weak={} strong={}",
            bit.report.strongly_symmetric,
            phase.report.weakly_symmetric,
            phase.report.strongly_symmetric,
            pair.report.strongly_symmetric,
            pair.report.phases,
            pair.permutation,
            heis.report.weakly_symmetric,
            heis.report.strongly_symmetric
        )
    ));
}

fn qoft_pairs() -> Vec<(thermalizer::qcore::Matrix, thermalizer::qcore::Matrix)> {
    let mut rng = common::rng(2024);
    (0..20).map(|_| (random::random_hermitian(4, &mut rng), random::random_hermitian(4, &mut rng))).collect()
}

#[test]
fn criterion_5_jump_inequality() {
    let grid = linspace(-5.0, 5.0, 101);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for (h, a) in qoft_pairs() {
        let beta = 0.05 / spectral_norm(&h);
        let rep = verify_jump_inequality(&h, &a, beta, &grid).unwrap();
        failures += rep.failures().len();
        worst = rep.rows.iter().map(|r| r.lhs_norm / r.bound).fold(worst, f64::max);
    }
    assert!(report(
        "5-inequality",
        failures == 0,
        format!("20 pairs x 101 omegas, violations {failures}, max lhs/bound {worst:.3e}")
    ));
}

#[test]
fn criterion_5_quadrature_oracle() {
    let grid = linspace(-5.0, 5.0, 101);
    let mut worst: f64 = 0.0;
    for (h, a) in qoft_pairs() {
        let beta = 0.05 / spectral_norm(&h);
        let bohr = BohrDecomposition::new(&h).unwrap();
        for &w in &grid {
            let quad = quadrature_filtered_jump(&h, &a, w, beta, QUADRATURE_NODES).unwrap();
            worst = worst.max(max_abs(&(bohr.filtered_jump(&a, w, beta) - quad)));
        }
    }
    assert!(report("5-quadrature", worst <= 1e-6, format!("max |spectral - quadrature| {worst:.3e} (<= 1e-6)")));
}

#[test]
fn criterion_5_integrated_bound_scaling() {
    let betas = slope_betas();
    let slope = integrated_bound_slope(1.0, 1.0, &betas, false).unwrap();
    let even = integrated_bound_slope(1.0, 1.0, &betas, true).unwrap();
    let pass = (1.3..=1.7).contains(&slope);
    assert!(report(
        "5-scaling",
        pass,
        format!("log-log slope of the integrated bound {slope:.3} (in [1.3, 1.7]); even term alone {even:.3}")
    ));
}

#[test]
fn criterion_6_gradient_variance() {
    let n_range: Vec<usize> = (4..=10).collect();
    let observable = PauliString::parse("ZZ").unwrap();
    let slope = |family: AnsatzSpec| {
        let index = first_coupling_index(&family).unwrap();
        gradient_variance_study(&family, &observable, &n_range, 100, index, 0).unwrap().log_slope.unwrap()
    };
    let sym = slope(symmetric_family(4, 40));
    let nonsym = slope(nonsymmetric_family(4, 40));
    let pass = sym < 0.0 && nonsym < 0.0 && sym > nonsym;
    assert!(report(
        "6",
        pass,
        format!("40 layers, n=4..10, 100 samples: symmetric slope {sym:.3}, nonsymmetric slope {nonsym:.3}")
    ));
}

#[test]
fn criterion_7_pair_channel_advantage() {
    let model = SpinModel::heisenberg(6, 1.0);
    let single = heisenberg_ansatz(&model, 3, false);
    let pair = heisenberg_ansatz(&model, 3, true);
    let rows: Vec<(f64, f64, f64)> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&b| (b, trained_fidelity(&pair, &model, b), trained_fidelity(&single, &model, b)))
        .collect();
    let pass = rows.iter().all(|(_, p, s)| p >= s);
    let detail = rows
        .iter()
        .map(|(b, p, s)| format!("beta={b}: pair {p:.4} vs phaseflip {s:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    assert!(report("7", pass, format!("Heisenberg n=6 Delta=1: {detail}")));
}

#[test]
fn criterion_8_property_suite() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut count = 0;
    for (name, check, max_n) in common::CORE_INVARIANTS {
        for n in 2..=max_n {
            for seed in 0..16u64 {
                count += 1;
                if let Err(e) = check(seed * 1000 + n as u64, n) {
                    failures.push(format!("{name} n={n} seed={seed}: {e}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(300);
    assert!(report(
        "8",
        pass,
        format!(
            "{count} invariant checks at n <= 6 in {:.1}s, failures {}{}",
            elapsed.as_secs_f64(),
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        )
    ));
}
