//! Seeded random instances whose eigenvalues QPE reads exactly.

use rand::Rng;

use crate::linalg::{c64, ComplexMatrix, ComplexVector};
use crate::statevector::rng_from_seed;

/// Unitary from Gram–Schmidt on a matrix with entries uniform in the unit square.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<ComplexVector> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = ComplexVector::new(
            (0..dim)
                .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        for _ in 0..2 {
            for u in &cols {
                v = v.sub(&u.scale(u.inner(&v)));
            }
        }
        if let Some(unit) = v.normalized().filter(|_| v.norm() > 1e-6) {
            cols.push(unit);
        }
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (c, col) in cols.iter().enumerate() {
        for r in 0..dim {
            m[(r, c)] = col[r];
        }
    }
    m
}

/// `A = V diag(λ) V†` with integer `λ` drawn from `[1, 2^{n_clock})`, plus a
/// random unit right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub a: ComplexMatrix,
    pub b: ComplexVector,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

pub fn random_exact_instance(dim: usize, n_clock: usize, seed: u64) -> RandomInstance {
    let mut rng = rng_from_seed(seed);
    let top = 1u64 << n_clock;
    let eigenvalues: Vec<f64> = (0..dim).map(|_| rng.gen_range(1..top) as f64).collect();
    let v = random_unitary(dim, &mut rng);
    let diag: Vec<_> = eigenvalues.iter().map(|&l| c64(l, 0.0)).collect();
    let a = v
        .matmul(&ComplexMatrix::diagonal(&diag))
        .matmul(&v.adjoint());
    // Exact Hermitian symmetry keeps the input check independent of rounding.
    let mut sym = a.clone();
    for r in 0..dim {
        for c in 0..dim {
            sym[(r, c)] = (a[(r, c)] + a[(c, r)].conj()) * 0.5;
        }
    }
    let b = ComplexVector::new(
        (0..dim)
            .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
    .normalized()
    .expect("random vector is nonzero");
    RandomInstance {
        a: sym,
        b,
        eigenvalues,
        eigenvectors: v,
    }
}
