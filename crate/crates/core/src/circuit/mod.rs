//! Circuit intermediate representation.
//!
//! Qubit ordering is little-endian throughout: qubit 0 is the least
//! significant bit of a basis-state index.

mod gate;
mod json;

pub use gate::{gate_matrix, Gate, GateKind, UNITARY_TOL};

use crate::error::{Error, Result};
use crate::kernel;
use crate::linalg::ComplexMatrix;

/// Largest register for which [`circuit_unitary`] will build the dense matrix.
pub const MAX_UNITARY_QUBITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Gate {
        gate: Gate,
        controls: Vec<usize>,
        targets: Vec<usize>,
    },
    /// Named no-op marking a snapshot point.
    Barrier(String),
    Measure {
        qubit: usize,
        clbit: usize,
    },
}

/// A named group of qubits, e.g. the clock register.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    pub name: String,
    pub qubits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    registers: Vec<Register>,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Self {
            num_qubits,
            num_clbits,
            registers: Vec::new(),
            ops: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&[usize]> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.qubits.as_slice())
    }

    pub fn add_register(&mut self, name: impl Into<String>, qubits: Vec<usize>) -> Result<()> {
        for &q in &qubits {
            self.check_qubit(q)?;
        }
        self.registers.push(Register {
            name: name.into(),
            qubits,
        });
        Ok(())
    }

    /// Iterator over gate applications only, skipping barriers and measurements.
    pub fn gates(&self) -> impl Iterator<Item = (&Gate, &[usize], &[usize])> {
        self.ops.iter().filter_map(|op| match op {
            Op::Gate {
                gate,
                controls,
                targets,
            } => Some((gate, controls.as_slice(), targets.as_slice())),
            _ => None,
        })
    }

    pub fn has_measurements(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, Op::Measure { .. }))
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::IndexOutOfRange {
                index: q,
                len: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Appends in place. `qubits` lists the controls first, then the targets.
    pub fn push_gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<()> {
        if qubits.len() != gate.width() {
            return Err(Error::ArityMismatch {
                expected: gate.width(),
                got: qubits.len(),
            });
        }
        for (i, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateTarget(q));
            }
        }
        let (controls, targets) = qubits.split_at(gate.num_controls);
        self.ops.push(Op::Gate {
            controls: controls.to_vec(),
            targets: targets.to_vec(),
            gate,
        });
        Ok(())
    }

    /// Value-semantics append: returns a new circuit and leaves `self` untouched.
    pub fn append_gate(&self, gate: Gate, qubits: &[usize]) -> Result<Circuit> {
        let mut next = self.clone();
        next.push_gate(gate, qubits)?;
        Ok(next)
    }

    pub fn barrier(&mut self, label: impl Into<String>) {
        self.ops.push(Op::Barrier(label.into()));
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        if clbit >= self.num_clbits {
            return Err(Error::IndexOutOfRange {
                index: clbit,
                len: self.num_clbits,
            });
        }
        self.ops.push(Op::Measure { qubit, clbit });
        Ok(())
    }

    // Shorthands used by the builders.

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.push_gate(Gate::new(GateKind::X), &[q])
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.push_gate(Gate::new(GateKind::H), &[q])
    }

    pub fn ry(&mut self, theta: f64, q: usize) -> Result<()> {
        self.push_gate(Gate::new(GateKind::RY(theta)), &[q])
    }

    pub fn rz(&mut self, theta: f64, q: usize) -> Result<()> {
        self.push_gate(Gate::new(GateKind::RZ(theta)), &[q])
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.push_gate(Gate::controlled(GateKind::X, 1), &[control, target])
    }

    pub fn cp(&mut self, theta: f64, control: usize, target: usize) -> Result<()> {
        self.push_gate(
            Gate::controlled(GateKind::Phase(theta), 1),
            &[control, target],
        )
    }

    pub fn cry(&mut self, theta: f64, control: usize, target: usize) -> Result<()> {
        self.push_gate(Gate::controlled(GateKind::RY(theta), 1), &[control, target])
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.push_gate(Gate::new(GateKind::Swap), &[a, b])
    }

    /// Appends every op of `other`, relabelling its qubit `i` as `qubit_map[i]`
    /// and its clbit `j` as `clbit_map[j]`.
    pub fn extend_mapped(
        &mut self,
        other: &Circuit,
        qubit_map: &[usize],
        clbit_map: &[usize],
    ) -> Result<()> {
        if qubit_map.len() < other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: other.num_qubits,
                got: qubit_map.len(),
            });
        }
        for op in &other.ops {
            match op {
                Op::Gate {
                    gate,
                    controls,
                    targets,
                } => {
                    let qubits: Vec<usize> = controls
                        .iter()
                        .chain(targets)
                        .map(|&q| qubit_map[q])
                        .collect();
                    self.push_gate(gate.clone(), &qubits)?;
                }
                Op::Barrier(label) => self.barrier(label.clone()),
                Op::Measure { qubit, clbit } => {
                    let c = *clbit_map.get(*clbit).ok_or(Error::IndexOutOfRange {
                        index: *clbit,
                        len: clbit_map.len(),
                    })?;
                    self.measure(qubit_map[*qubit], c)?;
                }
            }
        }
        Ok(())
    }

    /// Appends `other`, which must act on a register no wider than `self`.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        let qmap: Vec<usize> = (0..other.num_qubits).collect();
        let cmap: Vec<usize> = (0..other.num_clbits).collect();
        self.extend_mapped(other, &qmap, &cmap)
    }
}

/// Reverses the op order and replaces each gate by its adjoint.
pub fn invert_circuit(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit {
        num_qubits: c.num_qubits,
        num_clbits: c.num_clbits,
        registers: c.registers.clone(),
        ops: Vec::with_capacity(c.ops.len()),
    };
    for op in c.ops.iter().rev() {
        match op {
            Op::Gate {
                gate,
                controls,
                targets,
            } => out.ops.push(Op::Gate {
                gate: gate.adjoint(),
                controls: controls.clone(),
                targets: targets.clone(),
            }),
            Op::Barrier(label) => out.ops.push(Op::Barrier(label.clone())),
            Op::Measure { .. } => return Err(Error::ContainsMeasurement),
        }
    }
    Ok(out)
}

/// Dense unitary of a measurement-free circuit, built column by column.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    if c.has_measurements() {
        return Err(Error::ContainsMeasurement);
    }
    if c.num_qubits > MAX_UNITARY_QUBITS {
        return Err(Error::TooLarge {
            what: "qubit count",
            size: c.num_qubits,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << c.num_qubits;
    let compiled: Vec<_> = c
        .gates()
        .map(|(g, ctrl, tgt)| (g.kind.matrix(), ctrl, tgt))
        .collect();
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut column = vec![crate::linalg::ZERO; dim];
    for col in 0..dim {
        column.fill(crate::linalg::ZERO);
        column[col] = crate::linalg::ONE;
        for (m, ctrl, tgt) in &compiled {
            kernel::apply_controlled(&mut column, m, ctrl, tgt);
        }
        for (row, z) in column.iter().enumerate() {
            out[(row, col)] = *z;
        }
    }
    Ok(out)
}
