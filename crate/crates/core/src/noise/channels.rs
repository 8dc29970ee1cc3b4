use crate::linalg::{c64, ComplexMatrix, ZERO};

/// A completely positive map `ρ ↦ Σ K ρ K†` on `log2(dim)` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub name: &'static str,
    pub ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn num_qubits(&self) -> usize {
        self.ops[0].rows().trailing_zeros() as usize
    }

    /// `max |Σ K†K − I|`.
    pub fn completeness_error(&self) -> f64 {
        let dim = self.ops[0].rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for k in &self.ops {
            sum = sum.add(&k.adjoint().matmul(k));
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }
}

fn pauli(index: usize) -> ComplexMatrix {
    let (o, z) = (c64(1.0, 0.0), ZERO);
    match index {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_rows(&[[z, o], [o, z]]),
        2 => ComplexMatrix::from_rows(&[[z, c64(0.0, -1.0)], [c64(0.0, 1.0), z]]),
        _ => ComplexMatrix::from_rows(&[[o, z], [z, -o]]),
    }
}

/// `k`-qubit depolarizing channel `ρ ↦ (1−p)ρ + p·I/2^k`, written as
/// `K_0 = √(1 − p(d²−1)/d²)·I` and `K_P = √(p/d²)·P` over the non-identity
/// Pauli strings, `d = 2^k`.
pub fn depolarizing(num_qubits: usize, p: f64) -> KrausChannel {
    let d = 1usize << num_qubits;
    let d2 = (d * d) as f64;
    let strings = 1usize << (2 * num_qubits);
    let ops = (0..strings)
        .map(|s| {
            // Base-4 digit j selects the Pauli on qubit j (qubit 0 least significant).
            let mut m = ComplexMatrix::identity(1);
            for j in (0..num_qubits).rev() {
                m = m.kron(&pauli(s >> (2 * j) & 3));
            }
            let weight = if s == 0 {
                1.0 - p * (d2 - 1.0) / d2
            } else {
                p / d2
            };
            m.scale(c64(weight.sqrt(), 0.0))
        })
        .collect();
    KrausChannel {
        name: "depolarizing",
        ops,
    }
}

/// Energy relaxation with decay probability `γ`.
pub fn amplitude_damping(gamma: f64) -> KrausChannel {
    let k0 = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, (1.0 - gamma).sqrt()]]);
    let k1 = ComplexMatrix::from_real_rows(&[[0.0, gamma.sqrt()], [0.0, 0.0]]);
    KrausChannel {
        name: "amplitude_damping",
        ops: vec![k0, k1],
    }
}

/// Pure dephasing; off-diagonal elements shrink by `√(1−λ)`.
pub fn phase_damping(lambda: f64) -> KrausChannel {
    let k0 = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, (1.0 - lambda).sqrt()]]);
    let k1 = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, lambda.sqrt()]]);
    KrausChannel {
        name: "phase_damping",
        ops: vec![k0, k1],
    }
}
