use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{ComplexMatrix, C64};

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(&mut rng))
}

pub fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let g = random_matrix(n, n, seed);
    ComplexMatrix::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)
}

pub fn random_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| gaussian(&mut rng)).collect()
}

pub fn random_unit(n: usize, seed: u64) -> Vec<C64> {
    crate::linalg::normalized(&random_vector(n, seed)).unwrap()
}

/// Haar-ish unitary from QR-by-Gram-Schmidt of a Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let cols = crate::linalg::orthonormalize(&random_matrix(n, n, seed).columns());
    ComplexMatrix::from_columns(&cols).unwrap()
}
