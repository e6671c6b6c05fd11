//! Seeded random states and operators.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{c, DensityMatrix, Matrix, Vector};

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        for v in q.column_mut(k).iter_mut() {
            *v *= phase;
        }
    }
    q
}

/// Hermitian matrix from the Gaussian unitary ensemble, scaled to unit spectral norm.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let g = ginibre(d, d, rng);
    let h = (&g + g.adjoint()) * c(0.5, 0.0);
    let norm = super::spectral_norm(&h);
    h / c(norm, 0.0)
}

pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    let v = ginibre(1 << n, 1, rng).column(0).into_owned();
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Full-rank Hilbert-Schmidt random density matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let d = 1usize << n;
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let tr = super::trace(&m).re;
    DensityMatrix::from_trusted(m / c(tr, 0.0))
}
