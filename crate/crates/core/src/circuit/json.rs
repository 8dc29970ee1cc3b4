//! Circuit JSON:
//! `{"qubits":N,"clbits":M,"ops":[{"gate":"cu","params":[..],"controls":[..],"targets":[..]},
//! {"barrier":"phi4"},{"measure":{"q":3,"c":0}}]}`.
//!
//! A controlled gate's name carries one `c` prefix per control (`cx`, `ccry`).
//! `unitary` gates carry their matrix under `"matrix"`.

use serde::{Deserialize, Serialize};

use super::{Circuit, Gate, GateKind, Op, Register};
use crate::error::Error;
use crate::linalg::ComplexMatrix;

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    qubits: usize,
    clbits: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    registers: Vec<RegisterJson>,
    ops: Vec<OpJson>,
}

#[derive(Serialize, Deserialize)]
struct RegisterJson {
    name: String,
    qubits: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OpJson {
    Gate {
        gate: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        params: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<ComplexMatrix>,
        #[serde(default)]
        controls: Vec<usize>,
        targets: Vec<usize>,
    },
    Barrier {
        barrier: String,
    },
    Measure {
        measure: MeasureJson,
    },
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    q: usize,
    c: usize,
}

fn parse_kind(
    base: &str,
    params: &[f64],
    matrix: Option<ComplexMatrix>,
) -> Result<GateKind, Error> {
    let want = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "gate '{base}' takes {n} parameters, got {}",
                params.len()
            )))
        }
    };
    Ok(match base {
        "x" => {
            want(0)?;
            GateKind::X
        }
        "h" => {
            want(0)?;
            GateKind::H
        }
        "swap" => {
            want(0)?;
            GateKind::Swap
        }
        "p" => {
            want(1)?;
            GateKind::Phase(params[0])
        }
        "ry" => {
            want(1)?;
            GateKind::RY(params[0])
        }
        "rz" => {
            want(1)?;
            GateKind::RZ(params[0])
        }
        "u" => {
            want(4)?;
            GateKind::U {
                theta: params[0],
                phi: params[1],
                lambda: params[2],
                gamma: params[3],
            }
        }
        "unitary" => {
            let m = matrix.ok_or_else(|| Error::Parse("unitary gate needs a matrix".into()))?;
            GateKind::from_matrix(m)?
        }
        other => return Err(Error::Parse(format!("unknown gate '{other}'"))),
    })
}

/// Splits `ccry` into (2, "ry"). Only the known base names are accepted, so a
/// leading `c` is never ambiguous.
fn split_controls(name: &str) -> (usize, &str) {
    let bases = ["x", "h", "swap", "p", "ry", "rz", "u", "unitary"];
    let stripped = name.trim_start_matches('c');
    let n = name.len() - stripped.len();
    if bases.contains(&stripped) {
        (n, stripped)
    } else {
        (0, name)
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(j: CircuitJson) -> Result<Self, Error> {
        let mut c = Circuit::new(j.qubits, j.clbits);
        for r in j.registers {
            c.add_register(r.name, r.qubits)?;
        }
        for op in j.ops {
            match op {
                OpJson::Gate {
                    gate,
                    params,
                    matrix,
                    controls,
                    targets,
                } => {
                    let (n_ctrl, base) = split_controls(&gate);
                    if n_ctrl != controls.len() {
                        return Err(Error::Parse(format!(
                            "gate '{gate}' implies {n_ctrl} controls but {} were listed",
                            controls.len()
                        )));
                    }
                    let kind = parse_kind(base, &params, matrix)?;
                    let qubits: Vec<usize> = controls.iter().chain(&targets).copied().collect();
                    c.push_gate(Gate::controlled(kind, n_ctrl), &qubits)?;
                }
                OpJson::Barrier { barrier } => c.barrier(barrier),
                OpJson::Measure { measure } => c.measure(measure.q, measure.c)?,
            }
        }
        Ok(c)
    }
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        let ops = c
            .ops
            .iter()
            .map(|op| match op {
                Op::Gate {
                    gate,
                    controls,
                    targets,
                } => OpJson::Gate {
                    gate: format!("{}{}", "c".repeat(gate.num_controls), gate.kind.name()),
                    params: gate.kind.params(),
                    matrix: match &gate.kind {
                        GateKind::Matrix(m) => Some(m.clone()),
                        _ => None,
                    },
                    controls: controls.clone(),
                    targets: targets.clone(),
                },
                Op::Barrier(label) => OpJson::Barrier {
                    barrier: label.clone(),
                },
                Op::Measure { qubit, clbit } => OpJson::Measure {
                    measure: MeasureJson {
                        q: *qubit,
                        c: *clbit,
                    },
                },
            })
            .collect();
        CircuitJson {
            qubits: c.num_qubits,
            clbits: c.num_clbits,
            registers: c
                .registers
                .iter()
                .map(|Register { name, qubits }| RegisterJson {
                    name: name.clone(),
                    qubits: qubits.clone(),
                })
                .collect(),
            ops,
        }
    }
}

impl Circuit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitJson::from(self)).expect("circuit JSON is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let j: CircuitJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Circuit::try_from(j)
    }
}
