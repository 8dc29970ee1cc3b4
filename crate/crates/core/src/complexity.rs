//! Asymptotic cost formulas and measured classical work.
//!
//! Every formula is evaluated with a unit constant factor, so the numbers are
//! scaling indicators, not run-time predictions.
//!
//! | method | estimate |
//! |---|---|
//! | HHL | `log2(N)·s²·k²/ε` |
//! | conjugate gradient | `N·s·√k·ln(1/ε)` |
//! | Gaussian elimination | `N³` |
//! | block Krylov | `N^2.33` |
//!
//! The sparsity-free HHL form `k²·log(N)/ε` is the `s = 1` case.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format_number;
use crate::linalg::{CgRun, GaussRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hhl,
    ConjugateGradient,
    GaussianElimination,
    BlockKrylov,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hhl => "hhl",
            Method::ConjugateGradient => "conjugate_gradient",
            Method::GaussianElimination => "gaussian_elimination",
            Method::BlockKrylov => "block_krylov",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub method: Method,
    pub n: u64,
    pub s: u64,
    pub k: f64,
    pub eps: f64,
    pub ops: f64,
}

fn check(n: u64, s: u64, k: f64, eps: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "N = {n} must be at least 2"
        )));
    }
    if s < 1 {
        return Err(Error::InvalidParameter(
            "sparsity s must be at least 1".into(),
        ));
    }
    if !k.is_finite() || k < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "condition number k = {k} must be ≥ 1"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} must lie in (0, 1)"
        )));
    }
    Ok(())
}

pub fn complexity_estimate(
    method: Method,
    n: u64,
    s: u64,
    k: f64,
    eps: f64,
) -> Result<CostEstimate> {
    check(n, s, k, eps)?;
    let nf = n as f64;
    let sf = s as f64;
    let ops = match method {
        Method::Hhl => nf.log2() * sf * sf * k * k / eps,
        Method::ConjugateGradient => nf * sf * k.sqrt() * (1.0 / eps).ln(),
        Method::GaussianElimination => nf.powi(3),
        Method::BlockKrylov => nf.powf(2.33),
    };
    Ok(CostEstimate {
        method,
        n,
        s,
        k,
        eps,
        ops,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverRow {
    pub n: u64,
    pub hhl: f64,
    pub cg: f64,
    pub gauss: f64,
    pub krylov: f64,
    pub cg_over_hhl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverTable {
    pub s: u64,
    pub k: f64,
    pub eps: f64,
    pub rows: Vec<CrossoverRow>,
}

pub fn crossover_table(s: u64, k: f64, eps: f64, n_grid: &[u64]) -> Result<CrossoverTable> {
    let rows = n_grid
        .iter()
        .map(|&n| {
            let est = |m| complexity_estimate(m, n, s, k, eps).map(|e| e.ops);
            let hhl = est(Method::Hhl)?;
            let cg = est(Method::ConjugateGradient)?;
            Ok(CrossoverRow {
                n,
                hhl,
                cg,
                gauss: est(Method::GaussianElimination)?,
                krylov: est(Method::BlockKrylov)?,
                cg_over_hhl: cg / hhl,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossoverTable { s, k, eps, rows })
}

impl CrossoverTable {
    /// Smallest `N` in the table where the HHL estimate is below `other`'s.
    pub fn first_advantage(&self, other: impl Fn(&CrossoverRow) -> f64) -> Option<u64> {
        self.rows.iter().find(|r| r.hhl < other(r)).map(|r| r.n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# unit-constant operation-count estimates (scaling only, not run time); s={},k={},eps={}",
            self.s,
            format_number(self.k),
            format_number(self.eps)
        );
        let first = |f: &dyn Fn(&CrossoverRow) -> f64| {
            self.first_advantage(f)
                .map_or("none".to_string(), |n| n.to_string())
        };
        let _ = writeln!(
            out,
            "# hhl below cg from N={}, below gauss from N={}",
            first(&|r| r.cg),
            first(&|r| r.gauss)
        );
        out.push_str("N,hhl_ops,cg_ops,gauss_ops,krylov_ops,ratio_cg_hhl\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n,
                format_number(r.hhl),
                format_number(r.cg),
                format_number(r.gauss),
                format_number(r.krylov),
                format_number(r.cg_over_hhl)
            );
        }
        out
    }
}

/// A completed, instrumented classical solve.
pub trait SolverRun {
    fn ops(&self) -> u64;
}

impl SolverRun for GaussRun {
    fn ops(&self) -> u64 {
        self.ops
    }
}

impl SolverRun for CgRun {
    fn ops(&self) -> u64 {
        self.ops
    }
}

/// Scalar multiply-adds performed by `run`.
pub fn measured_ops(run: &impl SolverRun) -> u64 {
    run.ops()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn formula_examples() {
        let g = complexity_estimate(Method::GaussianElimination, 100, 1, 1.0, 0.5).unwrap();
        assert_eq!(g.ops, 1e6);
        let h = complexity_estimate(Method::Hhl, 1 << 10, 2, 2.0, 0.1).unwrap();
        assert!((h.ops - 1600.0).abs() < 1e-9);
        let c = complexity_estimate(Method::ConjugateGradient, 100, 2, 4.0, 1.0 / E).unwrap();
        assert!((c.ops - 400.0).abs() < 1e-9);
        let k = complexity_estimate(Method::BlockKrylov, 10, 1, 1.0, 0.5).unwrap();
        assert!((k.ops - 10f64.powf(2.33)).abs() < 1e-9);
    }

    #[test]
    fn invalid_parameters() {
        for (n, s, k, eps) in [
            (1, 1, 1.0, 0.1),
            (4, 0, 1.0, 0.1),
            (4, 1, 0.5, 0.1),
            (4, 1, 1.0, 1.0),
            (4, 1, 1.0, 0.0),
        ] {
            assert!(matches!(
                complexity_estimate(Method::Hhl, n, s, k, eps),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn table_rows() {
        let t = crossover_table(2, 2.0, 0.1, &[2, 1 << 10, 1 << 20]).unwrap();
        assert_eq!(t.rows[0].gauss, 8.0);
        assert!((t.rows[2].hhl / t.rows[1].hhl - 2.0).abs() < 1e-12);
        assert!(t
            .rows
            .windows(2)
            .all(|w| w[1].cg_over_hhl > w[0].cg_over_hhl));
        assert!(t.to_csv().lines().nth(2).unwrap().starts_with("N,hhl_ops"));
    }
}
