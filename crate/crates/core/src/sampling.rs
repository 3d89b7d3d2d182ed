//! Seeded pseudo-random sampling of matrices and tuples.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{CMatrix, Real};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    Complex::new(normal(rng), normal(rng))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng))
}

/// Random Hermitian matrix.
pub fn hermitian_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix<T> {
    let g = gaussian_matrix::<T, R>(rng, dim);
    crate::scalar::hermitian_part(&g)
}

/// Unitary factor of the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix<T> {
    gaussian_matrix::<T, R>(rng, dim).qr().q()
}

/// Random linear combination of `basis` with complex Gaussian coefficients.
pub fn combination<T: Real, R: Rng + ?Sized>(rng: &mut R, basis: &[CMatrix<T>]) -> CMatrix<T> {
    let dim = basis[0].nrows();
    basis
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, b| acc + b * complex_normal::<T, R>(rng))
}

/// Uniform tuple in `{0..k}^n`.
pub fn tuple<R: Rng + ?Sized>(rng: &mut R, k: usize, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}
