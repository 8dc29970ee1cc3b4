//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and the
//! spectral functions built on it (`exp(iAt)`, integer powers, conditioning).

use num_complex::Complex64;

use super::{c64, ComplexMatrix, ONE, STRUCTURE_TOL, ZERO};
use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm target, relative to ‖A‖_F.
pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Largest dimension the dense solver accepts.
pub const MAX_EIGEN_DIM: usize = 64;

/// `A = V diag(values) V^H` with ascending real eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V^H` for a scalar function applied to each eigenvalue.
    pub fn spectral_map(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for r in 0..n {
                let vr = v[(r, k)] * fk;
                if vr == ZERO {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += vr * v[(c, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.spectral_map(|l| c64(l, 0.0))
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Hermitian eigendecomposition.
///
/// `tol` bounds the off-diagonal Frobenius norm relative to ‖A‖_F at
/// convergence. Eigenvalues come back ascending; each eigenvector is rotated so
/// its largest-magnitude component (first one on ties) is real and positive.
pub fn hermitian_eigendecompose(a: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    let n = a.require_square()?;
    if n > MAX_EIGEN_DIM {
        return Err(Error::TooLarge {
            what: "eigenproblem dimension",
            size: n,
            limit: MAX_EIGEN_DIM,
        });
    }
    let herm_err = a.hermiticity_error();
    if herm_err > STRUCTURE_TOL {
        return Err(Error::NonHermitianInput(herm_err));
    }

    // Symmetrize so the rotations see an exactly Hermitian matrix.
    let mut m = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        m[(r, r)] = c64(a[(r, r)].re, 0.0);
        for c in r + 1..n {
            let z = (a[(r, c)] + a[(c, r)].conj()) * 0.5;
            m[(r, c)] = z;
            m[(c, r)] = z.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    let threshold = tol * scale;

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&m);
    while off > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));

    let values = order.iter().map(|&k| m[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        let mut best = -1.0;
        for r in 0..n {
            let mag = v[(r, src)].norm();
            // Strictly greater (with slack) keeps the first index on ties.
            if mag > best + 1e-12 {
                best = mag;
                pivot = r;
            }
        }
        let z = v[(pivot, src)];
        let phase = if z.norm() > 0.0 {
            z.conj() / z.norm()
        } else {
            ONE
        };
        for r in 0..n {
            vectors[(r, dst)] = v[(r, src)] * phase;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// One Jacobi rotation zeroing `m[p][q]`: `m <- G^H m G`, `v <- v G`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Phase e^{-i arg(apq)} on column q makes the pivot real, then a real rotation.
    let phase = apq.conj() / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = [[c, s], [-s·phase, c·phase]] on rows/cols (p, q).
    let g_pp = c64(c, 0.0);
    let g_pq = c64(s, 0.0);
    let g_qp = phase * (-s);
    let g_qq = phase * c;

    let n = m.rows();
    // Columns: m <- m G
    for r in 0..n {
        let mp = m[(r, p)];
        let mq = m[(r, q)];
        m[(r, p)] = mp * g_pp + mq * g_qp;
        m[(r, q)] = mp * g_pq + mq * g_qq;
        let vp = v[(r, p)];
        let vq = v[(r, q)];
        v[(r, p)] = vp * g_pp + vq * g_qp;
        v[(r, q)] = vp * g_pq + vq * g_qq;
    }
    // Rows: m <- G^H m
    for col in 0..n {
        let mp = m[(p, col)];
        let mq = m[(q, col)];
        m[(p, col)] = g_pp.conj() * mp + g_qp.conj() * mq;
        m[(q, col)] = g_pq.conj() * mp + g_qq.conj() * mq;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = c64(m[(p, p)].re, 0.0);
    m[(q, q)] = c64(m[(q, q)].re, 0.0);
}

/// `e^{iAt}` for Hermitian `A`.
pub fn matrix_exponential_i(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigendecompose(a, JACOBI_TOL)?;
    Ok(matrix_power_via_eigen(&eig, t, 1))
}

/// `(e^{iAt})^l = V diag(e^{i λ t l}) V^H`; negative `l` gives inverse powers.
pub fn matrix_power_via_eigen(eig: &EigenDecomposition, t: f64, l: i64) -> ComplexMatrix {
    let scale = t * l as f64;
    eig.spectral_map(|lambda| Complex64::from_polar(1.0, lambda * scale))
}

/// `|λ|_max / |λ|_min` of a Hermitian matrix.
pub fn condition_number(a: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eigendecompose(a, JACOBI_TOL)?;
    let (lo, hi) = eig
        .values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), l| {
            (lo.min(l.abs()), hi.max(l.abs()))
        });
    if hi == 0.0 || lo <= 1e-12 * hi {
        return Err(Error::SingularMatrix);
    }
    Ok(hi / lo)
}
