//! HHL linear-systems solving on simulated quantum hardware.
//!
//! The crate covers the whole pipeline: dense linear algebra and classical
//! reference solvers ([`linalg`]), a circuit IR ([`circuit`]), ideal statevector
//! execution ([`statevector`]), QFT/QPE builders ([`qpe`]), the HHL pipeline
//! itself ([`hhl`]), density-matrix noise simulation ([`noise`]) and the
//! complexity bookkeeping used for classical comparisons ([`complexity`]).

pub mod circuit;
pub mod complexity;
pub mod error;
pub mod hhl;
mod kernel;
pub mod linalg;
pub mod noise;
pub mod qpe;
pub mod statevector;

pub use circuit::{circuit_unitary, gate_matrix, invert_circuit, Circuit, Gate, GateKind, Op};
pub use error::{Error, Result};
pub use hhl::{HhlProblem, HhlResult, RunMode};
pub use linalg::{ComplexMatrix, ComplexVector, EigenDecomposition};
pub use noise::{DensityMatrix, NoiseModel};
pub use statevector::{ShotHistogram, SnapshotSet, StateVector};

/// Rounds to 12 significant digits, the precision of all printed output.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Shortest text for `x` rounded to 12 significant digits; scientific
/// notation outside `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r != 0.0 && r.is_finite() && !(1e-4..1e15).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}
