use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::layout::QubitSpan;
use crate::error::{Error, Result};

const UNITARITY_TOL: f64 = 1e-12;

/// A control qubit that fires when it reads `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub value: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Control { qubit, value: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Control {
            qubit,
            value: false,
        }
    }
}

/// The gate families the lattice circuits are built from.
#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    Hadamard {
        target: usize,
    },
    PauliX {
        target: usize,
    },
    MultiControlledX {
        controls: Vec<Control>,
        target: usize,
    },
    /// Hadamard applied only where every control matches; used by the duplication tree.
    MultiControlledHadamard {
        controls: Vec<Control>,
        target: usize,
    },
    Swap {
        a: usize,
        b: usize,
    },
    /// `diag(d)` on `span`, applied where `control` matches.
    ControlledDiagonal {
        control: Control,
        span: QubitSpan,
        diagonal: Vec<Complex64>,
    },
    /// State preparation `|0> -> v/|v|` on `span`, simulated as a direct write.
    AmplitudeLoad {
        span: QubitSpan,
        values: Vec<f64>,
    },
}

impl GateOp {
    pub fn name(&self) -> &'static str {
        match self {
            GateOp::Hadamard { .. } => "h",
            GateOp::PauliX { .. } => "x",
            GateOp::MultiControlledX { .. } => "mcx",
            GateOp::MultiControlledHadamard { .. } => "mch",
            GateOp::Swap { .. } => "swap",
            GateOp::ControlledDiagonal { .. } => "cdiag",
            GateOp::AmplitudeLoad { .. } => "load",
        }
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            GateOp::Hadamard { target } | GateOp::PauliX { target } => vec![*target],
            GateOp::MultiControlledX { controls, target }
            | GateOp::MultiControlledHadamard { controls, target } => controls
                .iter()
                .map(|c| c.qubit)
                .chain(std::iter::once(*target))
                .collect(),
            GateOp::Swap { a, b } => vec![*a, *b],
            GateOp::ControlledDiagonal { control, span, .. } => std::iter::once(control.qubit)
                .chain(span.qubits())
                .collect(),
            GateOp::AmplitudeLoad { span, .. } => span.qubits().collect(),
        }
    }

    /// Same gate with every qubit index moved up by `offset`.
    pub fn shifted(&self, offset: usize) -> GateOp {
        let c = |cs: &[Control]| {
            cs.iter()
                .map(|c| Control {
                    qubit: c.qubit + offset,
                    value: c.value,
                })
                .collect()
        };
        match self {
            GateOp::Hadamard { target } => GateOp::Hadamard {
                target: target + offset,
            },
            GateOp::PauliX { target } => GateOp::PauliX {
                target: target + offset,
            },
            GateOp::MultiControlledX { controls, target } => GateOp::MultiControlledX {
                controls: c(controls),
                target: target + offset,
            },
            GateOp::MultiControlledHadamard { controls, target } => {
                GateOp::MultiControlledHadamard {
                    controls: c(controls),
                    target: target + offset,
                }
            }
            GateOp::Swap { a, b } => GateOp::Swap {
                a: a + offset,
                b: b + offset,
            },
            GateOp::ControlledDiagonal {
                control,
                span,
                diagonal,
            } => GateOp::ControlledDiagonal {
                control: Control {
                    qubit: control.qubit + offset,
                    value: control.value,
                },
                span: QubitSpan::new(span.start + offset, span.len),
                diagonal: diagonal.clone(),
            },
            GateOp::AmplitudeLoad { span, values } => GateOp::AmplitudeLoad {
                span: QubitSpan::new(span.start + offset, span.len),
                values: values.clone(),
            },
        }
    }

    /// Index ranges, distinct qubits and parameter invariants.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        if let Some(&q) = qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
        }
        let mut sorted = qubits.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGate(format!(
                "{} acts twice on one qubit: {qubits:?}",
                self.name()
            )));
        }
        match self {
            GateOp::ControlledDiagonal { span, diagonal, .. } => {
                if diagonal.len() != span.dim() {
                    return Err(Error::InvalidGate(format!(
                        "diagonal has {} entries for a {}-qubit span",
                        diagonal.len(),
                        span.len
                    )));
                }
                if let Some((i, z)) = diagonal
                    .iter()
                    .enumerate()
                    .find(|(_, z)| !((z.norm() - 1.0).abs() <= UNITARITY_TOL))
                {
                    return Err(Error::InvalidGate(format!(
                        "diagonal entry {i} = {z} is not unimodular"
                    )));
                }
            }
            GateOp::AmplitudeLoad { span, values } => {
                if values.len() != span.dim() {
                    return Err(Error::InvalidGate(format!(
                        "{} amplitudes for a {}-qubit span",
                        values.len(),
                        span.len
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("amplitude-load vector"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
