use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, ONE, ZERO};

/// Unitaries checked at construction must be this close to unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// The uncontrolled part of a gate.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    H,
    /// `diag(1, e^{iθ})`.
    Phase(f64),
    /// `e^{iγ} [[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.
    U {
        theta: f64,
        phi: f64,
        lambda: f64,
        gamma: f64,
    },
    RY(f64),
    RZ(f64),
    Swap,
    /// Arbitrary unitary on `log2(dim)` qubits; the first target is the least
    /// significant bit of the matrix index.
    Matrix(ComplexMatrix),
}

impl GateKind {
    /// Wraps a matrix, rejecting anything that is not a power-of-two unitary.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        let n = m.require_square()?;
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let err = m.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(GateKind::Matrix(m))
    }

    /// Number of target qubits.
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Swap => 2,
            GateKind::Matrix(m) => m.rows().trailing_zeros() as usize,
            _ => 1,
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        match *self {
            GateKind::X => ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]),
            GateKind::H => {
                let h = c64(FRAC_1_SQRT_2, 0.0);
                ComplexMatrix::from_rows(&[[h, h], [h, -h]])
            }
            GateKind::Phase(theta) => {
                ComplexMatrix::diagonal(&[ONE, Complex64::from_polar(1.0, theta)])
            }
            GateKind::U {
                theta,
                phi,
                lambda,
                gamma,
            } => {
                let (s, c) = (theta / 2.0).sin_cos();
                let g = Complex64::from_polar(1.0, gamma);
                ComplexMatrix::from_rows(&[
                    [g * c, -g * Complex64::from_polar(s, lambda)],
                    [
                        g * Complex64::from_polar(s, phi),
                        g * Complex64::from_polar(c, phi + lambda),
                    ],
                ])
            }
            GateKind::RY(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                ComplexMatrix::from_real_rows(&[[c, -s], [s, c]])
            }
            GateKind::RZ(theta) => ComplexMatrix::diagonal(&[
                Complex64::from_polar(1.0, -theta / 2.0),
                Complex64::from_polar(1.0, theta / 2.0),
            ]),
            GateKind::Swap => ComplexMatrix::from_real_rows(&[
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ]),
            GateKind::Matrix(ref m) => m.clone(),
        }
    }

    pub fn adjoint(&self) -> Self {
        match *self {
            GateKind::X => GateKind::X,
            GateKind::H => GateKind::H,
            GateKind::Swap => GateKind::Swap,
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::RY(t) => GateKind::RY(-t),
            GateKind::RZ(t) => GateKind::RZ(-t),
            GateKind::U {
                theta,
                phi,
                lambda,
                gamma,
            } => GateKind::U {
                theta: -theta,
                phi: -lambda,
                lambda: -phi,
                gamma: -gamma,
            },
            GateKind::Matrix(ref m) => GateKind::Matrix(m.adjoint()),
        }
    }

    /// Lower-case mnemonic used in the circuit JSON and in printed listings.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Phase(_) => "p",
            GateKind::U { .. } => "u",
            GateKind::RY(_) => "ry",
            GateKind::RZ(_) => "rz",
            GateKind::Swap => "swap",
            GateKind::Matrix(_) => "unitary",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateKind::Phase(t) | GateKind::RY(t) | GateKind::RZ(t) => vec![t],
            GateKind::U {
                theta,
                phi,
                lambda,
                gamma,
            } => vec![theta, phi, lambda, gamma],
            _ => Vec::new(),
        }
    }
}

/// A gate kind together with the number of control qubits it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub num_controls: usize,
}

impl Gate {
    pub fn new(kind: GateKind) -> Self {
        Self {
            kind,
            num_controls: 0,
        }
    }

    pub fn controlled(kind: GateKind, num_controls: usize) -> Self {
        Self { kind, num_controls }
    }

    /// Total qubits touched: controls plus targets.
    pub fn width(&self) -> usize {
        self.num_controls + self.kind.arity()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            kind: self.kind.adjoint(),
            num_controls: self.num_controls,
        }
    }
}

/// Full `2^k × 2^k` matrix of a gate over the qubit list `targets ++ controls`,
/// with the first target as the least significant bit. The target unitary
/// occupies the block where every control is 1; identity elsewhere.
pub fn gate_matrix(g: &Gate) -> ComplexMatrix {
    let inner = g.kind.matrix();
    let block = inner.rows();
    let dim = block << g.num_controls;
    let mut out = ComplexMatrix::identity(dim);
    let offset = dim - block;
    for r in 0..block {
        for c in 0..block {
            out[(offset + r, offset + c)] = inner[(r, c)];
        }
    }
    out
}
