//! Gaussian-filtered jump operators, their first-order truncation and the truncation bound.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::qcore::{c, check_hermitian, commutator, spectral_norm, HermitianEigen, Matrix, C64, I};

/// Eigenvalues closer than this are treated as one degenerate level.
const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Transition weight `exp(-(beta omega + 1)^2 / 2)`.
pub fn gamma_weight(omega: f64, beta: f64) -> f64 {
    (-(beta * omega + 1.0).powi(2) / 2.0).exp()
}

fn filter_norm(beta: f64) -> f64 {
    (beta * (PI / 2.0).sqrt()).powf(-0.5)
}

/// Time-domain filter `exp(-t^2 / beta^2) / sqrt(beta sqrt(pi / 2))`.
pub fn filter(t: f64, beta: f64) -> f64 {
    filter_norm(beta) * (-(t * t) / (beta * beta)).exp()
}

/// `(1 / sqrt(2 pi)) int exp(i x t) f(t) dt = (N beta / sqrt 2) exp(-beta^2 x^2 / 4)`.
pub fn filter_transform(x: f64, beta: f64) -> f64 {
    filter_norm(beta) * beta / 2f64.sqrt() * (-beta * beta * x * x / 4.0).exp()
}

/// Coefficients `(c0, c1)` of `A` and `[iH, A]` in the truncated jump.
pub fn truncation_coefficients(omega: f64, beta: f64) -> (C64, C64) {
    let c0 = filter_transform(omega, beta);
    (c(c0, 0.0), c(0.0, -beta * beta * omega / 2.0 * c0))
}

/// Spectral data of a Hermitian operator grouped into degenerate levels.
#[derive(Clone, Debug)]
pub struct BohrDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Matrix>,
}

impl BohrDecomposition {
    pub fn new(h: &Matrix) -> Result<Self> {
        check_hermitian(h, "Hamiltonian")?;
        let eig = HermitianEigen::new(h)?;
        let d = h.nrows();
        let mut eigenvalues: Vec<f64> = Vec::new();
        let mut projectors: Vec<Matrix> = Vec::new();
        for (k, &e) in eig.values.iter().enumerate() {
            let v = eig.vectors.column(k);
            let outer = &v * v.adjoint();
            match eigenvalues.last() {
                Some(&last) if (e - last).abs() <= DEGENERACY_TOLERANCE * last.abs().max(1.0) => {
                    *projectors.last_mut().expect("paired") += outer;
                }
                _ => {
                    eigenvalues.push(e);
                    projectors.push(Matrix::zeros(d, d) + outer);
                }
            }
        }
        Ok(Self { eigenvalues, projectors })
    }

    /// `nu_ij = E_i - E_j`.
    pub fn bohr_frequencies(&self) -> DMatrix<f64> {
        let k = self.eigenvalues.len();
        DMatrix::from_fn(k, k, |i, j| self.eigenvalues[i] - self.eigenvalues[j])
    }

    pub fn reconstruct(&self) -> Matrix {
        let d = self.projectors[0].nrows();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(Matrix::zeros(d, d), |acc, (e, p)| acc + p * c(*e, 0.0))
    }

    /// `sum_ij Pi_i A Pi_j w(nu_ij - omega)`.
    pub fn filtered_jump(&self, a: &Matrix, omega: f64, beta: f64) -> Matrix {
        let d = a.nrows();
        let mut out = Matrix::zeros(d, d);
        for (i, pi) in self.projectors.iter().enumerate() {
            let left = pi * a;
            for (j, pj) in self.projectors.iter().enumerate() {
                let w = filter_transform(self.eigenvalues[i] - self.eigenvalues[j] - omega, beta);
                out += &left * pj * c(w, 0.0);
            }
        }
        out
    }
}

fn check_pair(h: &Matrix, a: &Matrix) -> Result<()> {
    check_hermitian(h, "Hamiltonian")?;
    if a.nrows() != h.nrows() || a.ncols() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: a.nrows() });
    }
    Ok(())
}

pub fn exact_filtered_jump(h: &Matrix, a: &Matrix, omega: f64, beta: f64) -> Result<Matrix> {
    check_pair(h, a)?;
    Ok(BohrDecomposition::new(h)?.filtered_jump(a, omega, beta))
}

/// `c0(omega) A + c1(omega) [iH, A]`.
pub fn truncated_jump(h: &Matrix, a: &Matrix, omega: f64, beta: f64) -> Result<Matrix> {
    check_pair(h, a)?;
    let (c0, c1) = truncation_coefficients(omega, beta);
    Ok(a * c0 + commutator(&(h * I), a) * c1)
}

/// Nodes and weights of `K`-point Gauss-Hermite quadrature for `int exp(-x^2) g(x) dx`.
pub fn gauss_hermite(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(k, k);
    for i in 1..k {
        let b = (i as f64 / 2.0).sqrt();
        jacobi[(i, i - 1)] = b;
        jacobi[(i - 1, i)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|j| (eig.eigenvalues[j], PI.sqrt() * eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Nodes used by the time-domain quadrature checks.
pub const QUADRATURE_NODES: usize = 96;

/// Time-domain quadrature of the defining integral, with `exp(iHt)` from a Pade exponential.
pub fn quadrature_filtered_jump(h: &Matrix, a: &Matrix, omega: f64, beta: f64, nodes: usize) -> Result<Matrix> {
    check_pair(h, a)?;
    let (xs, ws) = gauss_hermite(nodes);
    let pre = filter_norm(beta) * beta / (2.0 * PI).sqrt();
    let d = a.nrows();
    let mut out = Matrix::zeros(d, d);
    for (x, w) in xs.iter().zip(&ws) {
        let t = beta * x;
        let u = (h * c(0.0, t)).exp();
        let phase = C64::from_polar(1.0, -omega * t);
        out += &u * a * u.adjoint() * (phase * (w * pre));
    }
    Ok(out)
}

/// Analytic bound on the truncation error of the filtered jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationBound {
    pub delta_e: f64,
    pub delta_o: f64,
    pub beta: f64,
    pub h_norm: f64,
    pub a_norm: f64,
}

impl TruncationBound {
    pub fn new(h_norm: f64, a_norm: f64, beta: f64) -> Result<Self> {
        if !(h_norm > 0.0) || !(a_norm > 0.0) {
            return invalid("operator norms must be positive");
        }
        if !(beta >= 0.0) {
            return invalid("beta must be non-negative");
        }
        let c1 = (2.0 * beta * beta / PI).powf(0.25);
        let c2 = beta.powf(2.5) / (32.0 * PI).powf(0.25);
        let bh = beta * h_norm;
        let growth = (4.0 * bh * bh).exp();
        let delta_e = c1 * PI.powf(0.25) * bh * bh * a_norm * (bh * bh).exp() * growth;
        let delta_o = c2 * PI.sqrt() / 2.0 * h_norm * h_norm * a_norm * growth;
        Ok(Self { delta_e, delta_o, beta, h_norm, a_norm })
    }

    /// `delta_e exp(-beta^2 w^2 / 8) + delta_o |w| exp(-beta^2 w^2 / 4)`.
    pub fn eval(&self, omega: f64) -> f64 {
        self.even(omega) + self.odd(omega)
    }

    pub fn even(&self, omega: f64) -> f64 {
        self.delta_e * (-self.beta * self.beta * omega * omega / 8.0).exp()
    }

    pub fn odd(&self, omega: f64) -> f64 {
        self.delta_o * omega.abs() * (-self.beta * self.beta * omega * omega / 4.0).exp()
    }

    /// `int gamma (4 delta + 2 delta^2) d omega`, optionally keeping only the even term of `delta`.
    pub fn integrated(&self, even_only: bool) -> f64 {
        let beta = self.beta;
        let integrand = |x: f64| {
            let omega = x / beta;
            let delta = if even_only { self.even(omega) } else { self.eval(omega) };
            gamma_weight(omega, beta) * (4.0 * delta + 2.0 * delta * delta)
        };
        // composite Simpson in x = beta omega, split at the kink of |omega|
        let simpson = |lo: f64, hi: f64, steps: usize| {
            let h = (hi - lo) / steps as f64;
            let mut acc = integrand(lo) + integrand(hi);
            for k in 1..steps {
                acc += integrand(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        (simpson(-40.0, 0.0, 20_000) + simpson(0.0, 40.0, 20_000)) / beta
    }
}

pub fn truncation_error_bound(h_norm: f64, a_norm: f64, beta: f64, omega: f64) -> Result<f64> {
    Ok(TruncationBound::new(h_norm, a_norm, beta)?.eval(omega))
}

/// Liouvillian-distance bound `int gamma (4 delta + 2 delta^2) d omega`.
pub fn integrated_bound(h_norm: f64, a_norm: f64, beta: f64) -> Result<f64> {
    Ok(TruncationBound::new(h_norm, a_norm, beta)?.integrated(false))
}

/// Log-log slope of `integrated_bound` over the given inverse temperatures.
pub fn integrated_bound_slope(h_norm: f64, a_norm: f64, betas: &[f64], even_only: bool) -> Result<f64> {
    let x: Vec<f64> = betas.iter().map(|b| b.ln()).collect();
    let y = betas
        .iter()
        .map(|&b| Ok(TruncationBound::new(h_norm, a_norm, b)?.integrated(even_only).ln()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(crate::vqt::studies::linear_slope(&x, &y))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaRow {
    pub omega: f64,
    pub lhs_norm: f64,
    pub bound: f64,
    pub gamma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpInequalityReport {
    pub beta: f64,
    pub h_norm: f64,
    pub a_norm: f64,
    pub rows: Vec<OmegaRow>,
    pub all_pass: bool,
    pub liouvillian_bound: f64,
}

impl JumpInequalityReport {
    pub fn failures(&self) -> Vec<&OmegaRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }
}

/// Checks `||A(w) - A~(w)|| <= delta(w)` on a grid; needs `beta ||H|| <= 0.1`.
pub fn verify_jump_inequality(h: &Matrix, a: &Matrix, beta: f64, omega_grid: &[f64]) -> Result<JumpInequalityReport> {
    check_pair(h, a)?;
    let h_norm = spectral_norm(h);
    let a_norm = spectral_norm(a);
    if beta * h_norm > 0.1 + 1e-12 {
        return Err(Error::Precondition(format!("beta ||H|| = {} exceeds 0.1", beta * h_norm)));
    }
    let bohr = BohrDecomposition::new(h)?;
    let bound = TruncationBound::new(h_norm, a_norm, beta)?;
    let ih_a = commutator(&(h * I), a);
    let rows: Vec<OmegaRow> = omega_grid
        .iter()
        .map(|&omega| {
            let (c0, c1) = truncation_coefficients(omega, beta);
            let approx = a * c0 + &ih_a * c1;
            let lhs_norm = spectral_norm(&(bohr.filtered_jump(a, omega, beta) - approx));
            let b = bound.eval(omega);
            OmegaRow { omega, lhs_norm, bound: b, gamma: gamma_weight(omega, beta), pass: lhs_norm <= b }
        })
        .collect();
    Ok(JumpInequalityReport {
        beta,
        h_norm,
        a_norm,
        all_pass: rows.iter().all(|r| r.pass),
        rows,
        liouvillian_bound: bound.integrated(false),
    })
}

/// `points` evenly spaced values covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_abs, random, Pauli};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_examples() {
        assert!((gamma_weight(-1.0 / 0.7, 0.7) - 1.0).abs() < 1e-15);
        assert!((gamma_weight(0.0, 2.0) - (-0.5f64).exp()).abs() < 1e-15);
        assert!(gamma_weight(1.0, 0.5) < gamma_weight(0.5, 0.5));
    }

    #[test]
    fn gauss_hermite_integrates_moments() {
        let (x, w) = gauss_hermite(64);
        let moment = |k: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((moment(0) - PI.sqrt()).abs() < 1e-12);
        assert!((moment(2) - PI.sqrt() / 2.0).abs() < 1e-12);
        assert!((moment(4) - 3.0 * PI.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn filter_transform_matches_quadrature() {
        // direct Simpson quadrature of the defining integral, independent of the Hermite rule
        let beta = 0.8;
        for x in [-3.0, -0.4, 0.0, 1.1, 2.5] {
            let steps = 20_000;
            let (lo, hi) = (-10.0 * beta, 10.0 * beta);
            let h = (hi - lo) / steps as f64;
            let g = |t: f64| (x * t).cos() * filter(t, beta);
            let mut acc = g(lo) + g(hi);
            for k in 1..steps {
                acc += g(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            let quad = acc * h / 3.0 / (2.0 * PI).sqrt();
            assert!((quad - filter_transform(x, beta)).abs() < 1e-12);
        }
        assert_eq!(filter_transform(0.7, 1.3), filter_transform(-0.7, 1.3));
    }

    #[test]
    fn truncation_coefficients_match_quadrature() {
        let (x, w) = gauss_hermite(QUADRATURE_NODES);
        for (omega, beta) in [(0.0, 0.3), (1.7, 0.3), (-2.0, 0.05)] {
            let pre = filter_norm(beta) * beta / (2.0 * PI).sqrt();
            let moment = |k: i32| -> C64 {
                x.iter()
                    .zip(&w)
                    .map(|(s, wt)| C64::from_polar(1.0, -omega * beta * s) * (beta * s).powi(k) * (wt * pre))
                    .sum()
            };
            let (c0, c1) = truncation_coefficients(omega, beta);
            assert!((c0 - moment(0)).norm() < 1e-8);
            assert!((c1 - moment(1)).norm() < 1e-8);
        }
    }

    #[test]
    fn bohr_decomposition_resolves_identity() {
        let h = crate::models::SpinModel::tfim(3).hamiltonian().unwrap();
        let bohr = BohrDecomposition::new(&h).unwrap();
        let sum = bohr.projectors.iter().fold(Matrix::zeros(8, 8), |acc, p| acc + p);
        assert!(max_abs(&(sum - Matrix::identity(8, 8))) < 1e-10);
        assert!(max_abs(&(bohr.reconstruct() - h)) < 1e-10);
        assert!(bohr.eigenvalues.len() < 8, "tfim ring has degeneracies");
        assert_eq!(bohr.bohr_frequencies()[(0, 0)], 0.0);
    }

    #[test]
    fn commuting_jump_is_filtered_identically() {
        let h = Pauli::Z.matrix() * c(0.7, 0.0);
        let a = Pauli::Z.matrix();
        for omega in [-1.0, 0.0, 2.0] {
            let exact = exact_filtered_jump(&h, &a, omega, 0.4).unwrap();
            assert!(max_abs(&(&exact - &a * c(filter_transform(-omega, 0.4), 0.0))) < 1e-14);
            let trunc = truncated_jump(&h, &a, omega, 0.4).unwrap();
            assert!(max_abs(&(exact - trunc)) < 1e-14);
        }
    }

    #[test]
    fn spectral_form_matches_time_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random::random_hermitian(4, &mut rng);
        let a = random::random_hermitian(4, &mut rng);
        for omega in [-5.0, -1.2, 0.0, 0.8, 5.0] {
            let closed = exact_filtered_jump(&h, &a, omega, 0.05).unwrap();
            let quad = quadrature_filtered_jump(&h, &a, omega, 0.05, QUADRATURE_NODES).unwrap();
            assert!(max_abs(&(closed - quad)) < 1e-6);
        }
        // larger beta sees the Bohr structure
        let h = Pauli::Z.matrix();
        let a = Pauli::X.matrix();
        let closed = exact_filtered_jump(&h, &a, 2.0, 1.5).unwrap();
        let quad = quadrature_filtered_jump(&h, &a, 2.0, 1.5, QUADRATURE_NODES).unwrap();
        assert!(max_abs(&(closed - quad)) < 1e-6);
    }

    #[test]
    fn filtered_jump_concentrates_on_bohr_frequencies() {
        let h = Pauli::Z.matrix();
        let a = Pauli::X.matrix();
        let norm = |omega: f64| spectral_norm(&exact_filtered_jump(&h, &a, omega, 3.0).unwrap());
        assert!(norm(2.0) > 10.0 * norm(0.0));
        assert!(norm(-2.0) > 10.0 * norm(0.0));
        assert!(norm(40.0) < 1e-12);
    }

    #[test]
    fn truncation_improves_at_small_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random::random_hermitian(4, &mut rng);
        let a = random::random_hermitian(4, &mut rng);
        let err = |beta: f64| {
            spectral_norm(&(exact_filtered_jump(&h, &a, 0.5, beta).unwrap() - truncated_jump(&h, &a, 0.5, beta).unwrap()))
        };
        assert!(err(0.01) < err(0.1));
        assert!(err(0.001) < 1e-5);
    }

    #[test]
    fn bound_regression_and_scaling() {
        let b = truncation_error_bound(1.0, 1.0, 0.05, 1.0).unwrap();
        assert!((b - 0.000_830_869_329_730_137_3).abs() < 1e-15);
        let doubled = truncation_error_bound(1.0, 2.0, 0.05, 1.0).unwrap();
        assert!((doubled - 2.0 * b).abs() < 1e-15);
        assert!(truncation_error_bound(1.0, 1.0, 0.0, 1.0).unwrap() == 0.0);
        assert!(truncation_error_bound(0.0, 1.0, 0.1, 1.0).is_err());
        let tb = TruncationBound::new(1.0, 1.0, 0.05).unwrap();
        assert!((tb.delta_e - 0.000_673_148_978_020_433_5).abs() < 1e-16);
        assert!((tb.delta_o - 0.000_158_029_415_426_106_7).abs() < 1e-16);
        assert_eq!(tb.eval(-2.0), tb.eval(2.0));
    }

    #[test]
    fn inequality_holds_in_high_temperature_regime() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random::random_hermitian(4, &mut rng);
        let a = random::random_hermitian(4, &mut rng);
        let beta = 0.05 / spectral_norm(&h);
        let report = verify_jump_inequality(&h, &a, beta, &linspace(-5.0, 5.0, 21)).unwrap();
        assert!(report.all_pass, "{:?}", report.failures());
        assert!(report.liouvillian_bound > 0.0);
        assert!(verify_jump_inequality(&h, &a, 1.0, &[0.0]).is_err());
    }

    #[test]
    fn even_term_integral_scales_as_three_halves() {
        let betas: Vec<f64> = (0..5).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect();
        let slope = integrated_bound_slope(1.0, 1.0, &betas, true).unwrap();
        assert!((slope - 1.5).abs() < 0.05, "{slope}");
    }
}
