#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sepcheck::linalg::{ComplexMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(&mut r))
}

pub fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let g = random_matrix(n, n, seed);
    (&g + &g.adjoint()).scale(0.5)
}

pub fn random_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut r = rng(seed);
    (0..n).map(|_| gaussian(&mut r)).collect()
}

/// Columns of a random unitary, by classical Gram-Schmidt written out here.
pub fn random_unitary(n: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut r = rng(seed);
    let mut cols: Vec<Vec<C64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian(&mut r)).collect();
        for _ in 0..2 {
            for c in &cols {
                let p: C64 = c.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(c).for_each(|(y, x)| *y -= p * x);
            }
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-6 {
            cols.push(v.iter().map(|z| z / nrm).collect());
        }
    }
    cols
}

pub fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron(u: &[C64], v: &[C64]) -> Vec<C64> {
    u.iter().flat_map(|x| v.iter().map(move |y| x * y)).collect()
}

pub fn outer_sum(terms: &[(f64, Vec<C64>)]) -> ComplexMatrix {
    let d = terms[0].1.len();
    ComplexMatrix::from_fn(d, d, |i, j| terms.iter().map(|(w, v)| v[i] * v[j].conj() * *w).sum())
}

pub fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}
