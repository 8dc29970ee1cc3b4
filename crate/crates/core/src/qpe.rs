//! Quantum Fourier transform and phase-estimation circuit builders.
//!
//! Builders return local circuits: QFT circuits act on qubits `0..n`; QPE
//! circuits put the clock on `0..n_clock` and the target register after it.
//! Clock qubit `j` controls `U^(2^j)`, so the clock reads the phase as a
//! little-endian integer.

use std::f64::consts::PI;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Tolerance of the `U^(2^j) = U^(2^0)^(2^j)` consistency check.
pub const POWER_CONSISTENCY_TOL: f64 = 1e-9;
pub const POWER_UNITARY_TOL: f64 = 1e-10;

/// QFT: `|j⟩ ↦ 2^{-n/2} Σ_k e^{2πi jk/2^n} |k⟩`. Hadamards and positive
/// controlled phases from the most significant qubit down, then SWAP reversal.
pub fn build_qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for q in (0..n).rev() {
        c.h(q).expect("qubit in range");
        for m in (0..q).rev() {
            c.cp(PI / (1u64 << (q - m)) as f64, m, q)
                .expect("qubit in range");
        }
    }
    for i in 0..n / 2 {
        c.swap(i, n - 1 - i).expect("qubit in range");
    }
    c
}

/// Inverse QFT: SWAP reversal first, then for each qubit from the least
/// significant up a Hadamard followed by negative controlled phases.
pub fn build_iqft(n: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    for i in 0..n / 2 {
        c.swap(i, n - 1 - i).expect("qubit in range");
    }
    for q in 0..n {
        c.h(q).expect("qubit in range");
        for t in q + 1..n {
            c.cp(-PI / (1u64 << (t - q)) as f64, q, t)
                .expect("qubit in range");
        }
    }
    c
}

/// Controlled powers for phase estimation. `powers[j]` is `U^(2^j)` and
/// `inverse_powers[j]` is `U^(-2^j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpeSpec {
    pub n_clock: usize,
    pub powers: Vec<ComplexMatrix>,
    pub inverse_powers: Vec<ComplexMatrix>,
}

impl QpeSpec {
    /// Builds the spec from a supplier of `U^l` for integer `l`.
    pub fn from_supplier(n_clock: usize, supplier: impl Fn(i64) -> ComplexMatrix) -> Result<Self> {
        let powers = (0..n_clock).map(|j| supplier(1i64 << j)).collect();
        let inverse_powers = (0..n_clock).map(|j| supplier(-(1i64 << j))).collect();
        let spec = Self {
            n_clock,
            powers,
            inverse_powers,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds the spec by repeated squaring of a single unitary.
    pub fn from_unitary(n_clock: usize, u: &ComplexMatrix) -> Result<Self> {
        let mut powers = Vec::with_capacity(n_clock);
        let mut p = u.clone();
        for _ in 0..n_clock {
            powers.push(p.clone());
            p = p.matmul(&p);
        }
        let inverse_powers = powers.iter().map(ComplexMatrix::adjoint).collect();
        let spec = Self {
            n_clock,
            powers,
            inverse_powers,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn target_qubits(&self) -> usize {
        self.powers
            .first()
            .map_or(0, |m| m.rows().trailing_zeros() as usize)
    }

    /// Unitarity, power consistency and inverse consistency of every entry.
    pub fn validate(&self) -> Result<()> {
        if self.n_clock == 0 {
            return Err(Error::InvalidParameter(
                "QPE needs at least one clock qubit".into(),
            ));
        }
        if self.powers.len() != self.n_clock || self.inverse_powers.len() != self.n_clock {
            return Err(Error::DimensionMismatch {
                expected: self.n_clock,
                got: self.powers.len().min(self.inverse_powers.len()),
            });
        }
        let dim = self.powers[0].require_square()?;
        if !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let base = &self.powers[0];
        let mut expected = base.clone();
        let identity = ComplexMatrix::identity(dim);
        for j in 0..self.n_clock {
            for m in [&self.powers[j], &self.inverse_powers[j]] {
                if m.rows() != dim || m.cols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: m.rows(),
                    });
                }
                let err = m.unitarity_error();
                if err > POWER_UNITARY_TOL {
                    return Err(Error::NotUnitary(err));
                }
            }
            let deviation = self.powers[j].max_abs_diff(&expected);
            if deviation > POWER_CONSISTENCY_TOL {
                return Err(Error::SpecInconsistent {
                    clock: j,
                    deviation,
                });
            }
            let inverse_dev = self.inverse_powers[j]
                .matmul(&self.powers[j])
                .max_abs_diff(&identity);
            if inverse_dev > POWER_CONSISTENCY_TOL {
                return Err(Error::SpecInconsistent {
                    clock: j,
                    deviation: inverse_dev,
                });
            }
            expected = expected.matmul(&expected);
        }
        Ok(())
    }
}

fn qpe_width(spec: &QpeSpec) -> usize {
    spec.n_clock + spec.target_qubits()
}

fn controlled_powers(
    spec: &QpeSpec,
    matrices: &[ComplexMatrix],
    order: &[usize],
) -> Result<Circuit> {
    let mut c = Circuit::new(qpe_width(spec), 0);
    let target: Vec<usize> = (spec.n_clock..qpe_width(spec)).collect();
    for &j in order {
        let mut qubits = vec![j];
        qubits.extend(&target);
        c.push_gate(
            Gate::controlled(GateKind::from_matrix(matrices[j].clone())?, 1),
            &qubits,
        )?;
    }
    Ok(c)
}

fn clock_hadamards(spec: &QpeSpec) -> Circuit {
    let mut c = Circuit::new(qpe_width(spec), 0);
    for q in 0..spec.n_clock {
        c.h(q).expect("clock qubit in range");
    }
    c
}

fn on_clock(spec: &QpeSpec, clock_circuit: &Circuit) -> Result<Circuit> {
    let mut c = Circuit::new(qpe_width(spec), 0);
    let map: Vec<usize> = (0..spec.n_clock).collect();
    c.extend_mapped(clock_circuit, &map, &[])?;
    Ok(c)
}

/// The three QPE stages: clock Hadamards, controlled powers, inverse QFT.
pub fn qpe_stages(spec: &QpeSpec) -> Result<[Circuit; 3]> {
    spec.validate()?;
    let order: Vec<usize> = (0..spec.n_clock).collect();
    Ok([
        clock_hadamards(spec),
        controlled_powers(spec, &spec.powers, &order)?,
        on_clock(spec, &build_iqft(spec.n_clock))?,
    ])
}

/// The three inverse-QPE stages: QFT, controlled inverse powers (highest clock
/// qubit first), clock Hadamards.
pub fn inverse_qpe_stages(spec: &QpeSpec) -> Result<[Circuit; 3]> {
    spec.validate()?;
    let order: Vec<usize> = (0..spec.n_clock).rev().collect();
    Ok([
        on_clock(spec, &build_qft(spec.n_clock))?,
        controlled_powers(spec, &spec.inverse_powers, &order)?,
        clock_hadamards(spec),
    ])
}

fn concat(stages: &[Circuit]) -> Result<Circuit> {
    let mut c = Circuit::new(stages[0].num_qubits(), 0);
    for s in stages {
        c.extend(s)?;
    }
    Ok(c)
}

pub fn build_qpe(spec: &QpeSpec) -> Result<Circuit> {
    concat(&qpe_stages(spec)?)
}

pub fn build_inverse_qpe(spec: &QpeSpec) -> Result<Circuit> {
    concat(&inverse_qpe_stages(spec)?)
}

/// Clock value `2^n λ t / 2π` that QPE writes for eigenvalue `λ` of `A`
/// under `U = e^{iAt}`.
pub fn eigenvalue_to_clock(lambda: f64, t: f64, n_clock: usize) -> f64 {
    (1u64 << n_clock) as f64 * lambda * t / (2.0 * PI)
}
