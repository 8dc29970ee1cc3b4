//! Classical reference solvers. Both count scalar multiply-adds so the
//! complexity module can compare measured work with asymptotic formulas.

use super::{c64, ComplexMatrix, ComplexVector, ZERO};
use crate::error::{Error, Result};

/// Pivot magnitude below which elimination declares the matrix singular.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRun {
    pub solution: ComplexVector,
    /// Complex multiply-adds (divisions counted as one each).
    pub ops: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgRun {
    pub solution: ComplexVector,
    pub iterations: usize,
    pub ops: u64,
}

/// Gaussian elimination with partial pivoting, instrumented.
pub fn gaussian_elimination(a: &ComplexMatrix, b: &ComplexVector) -> Result<GaussRun> {
    let n = a.require_square()?;
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.dim(),
        });
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    let mut ops = 0u64;

    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm()))
            .unwrap_or(k);
        if m[(pivot_row, k)].norm() <= PIVOT_TOL {
            return Err(Error::SingularMatrix);
        }
        if pivot_row != k {
            for c in 0..n {
                let tmp = m[(k, c)];
                m[(k, c)] = m[(pivot_row, c)];
                m[(pivot_row, c)] = tmp;
            }
            rhs.as_mut_slice().swap(k, pivot_row);
        }
        let pivot = m[(k, k)];
        for i in k + 1..n {
            let factor = m[(i, k)] / pivot;
            m[(i, k)] = ZERO;
            for c in k + 1..n {
                let v = m[(k, c)];
                m[(i, c)] -= factor * v;
            }
            let rk = rhs[k];
            rhs[i] -= factor * rk;
            ops += (n - k - 1) as u64 + 2;
        }
    }

    let mut x = ComplexVector::zeros(n);
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for c in i + 1..n {
            acc -= m[(i, c)] * x[c];
        }
        x[i] = acc / m[(i, i)];
        ops += (n - i - 1) as u64 + 1;
    }
    Ok(GaussRun { solution: x, ops })
}

/// Solution of `A x = b` by partial-pivoting Gaussian elimination.
pub fn solve_linear_reference(a: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    gaussian_elimination(a, b).map(|run| run.solution)
}

/// Conjugate gradient for Hermitian positive-definite `A`, stopping once
/// `‖b − A x‖ ≤ eps·‖b‖`.
pub fn conjugate_gradient(
    a: &ComplexMatrix,
    b: &ComplexVector,
    eps: f64,
    max_iter: usize,
) -> Result<CgRun> {
    let n = a.require_square()?;
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.dim(),
        });
    }
    let n_ops = n as u64;
    let b_norm = b.norm();
    let mut x = ComplexVector::zeros(n);
    if b_norm == 0.0 {
        return Ok(CgRun {
            solution: x,
            iterations: 0,
            ops: 0,
        });
    }
    let target = eps * b_norm;
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs = r.norm_sqr();
    let mut ops = n_ops;

    for iter in 0..max_iter {
        let ap = a.mul_vec(&p);
        let curvature = p.inner(&ap).re;
        ops += n_ops * n_ops + n_ops;
        if curvature <= 0.0 {
            return Err(Error::NotPositiveDefinite(curvature));
        }
        let alpha = c64(rs / curvature, 0.0);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = r.norm_sqr();
        ops += 3 * n_ops;
        if rs_new.sqrt() <= target {
            return Ok(CgRun {
                solution: x,
                iterations: iter + 1,
                ops,
            });
        }
        let beta = c64(rs_new / rs, 0.0);
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        ops += n_ops;
        rs = rs_new;
    }
    Err(Error::MaxIterationsExceeded(max_iter))
}
