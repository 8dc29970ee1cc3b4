//! Fixtures shared by the benchmarks.

use hhllab_core::linalg::{c64, ComplexMatrix, ComplexVector};

/// Dense Hermitian positive-definite system of size `n` with an all-ones right-hand side.
pub fn dense_spd(n: usize) -> (ComplexMatrix, ComplexVector) {
    let mut a = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            a[(r, c)] = if r == c {
                c64(n as f64 + 1.0, 0.0)
            } else {
                c64(1.0 / (1 + r + c) as f64, 0.0)
            };
        }
    }
    (a, ComplexVector::from_real(&vec![1.0; n]))
}
