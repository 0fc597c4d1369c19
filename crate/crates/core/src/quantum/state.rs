use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::gate::{Control, GateOp};
use super::layout::RegisterLayout;
use crate::error::{Error, Result};

/// Largest register the engine will allocate (2^28 amplitudes = 4 GiB).
pub const MAX_QUBITS: usize = 28;

/// Calls `f` on every basis index whose `fixed` bits equal the bits of `base`.
///
/// `fixed` must be sorted ascending. Indices are produced in ascending order of
/// the remaining free bits, which is also the order [`StateVector::project_read`]
/// returns them in.
#[inline]
fn for_each_matching(n_qubits: usize, fixed: &[usize], base: usize, mut f: impl FnMut(usize)) {
    let free = n_qubits - fixed.len();
    for j in 0..(1usize << free) {
        let mut i = j;
        for &p in fixed {
            let low = i & ((1 << p) - 1);
            i = ((i >> p) << (p + 1)) | low;
        }
        f(i | base);
    }
}

fn control_mask(controls: &[Control]) -> (Vec<usize>, usize) {
    let mut fixed: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
    let base = controls
        .iter()
        .filter(|c| c.value)
        .fold(0, |acc, c| acc | (1 << c.qubit));
    fixed.sort_unstable();
    (fixed, base)
}

/// Dense complex amplitudes over `n_qubits` qubits, qubit 0 least significant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "state size {n_qubits} qubits outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn for_layout(layout: &RegisterLayout) -> Result<Self> {
        Self::zero(layout.n_total())
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes is not a power of two",
                amps.len()
            )));
        }
        Ok(StateVector {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateOp>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Applies one gate in place, O(2^n) time and O(1) extra space
    /// (amplitude loads write O(2^span) entries).
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let n = self.n_qubits;
        let amps = &mut self.amps;
        match gate {
            GateOp::Hadamard { target } => {
                let t = 1 << target;
                for_each_matching(n, &[*target], 0, |i| {
                    let (a, b) = (amps[i], amps[i | t]);
                    amps[i] = (a + b) * FRAC_1_SQRT_2;
                    amps[i | t] = (a - b) * FRAC_1_SQRT_2;
                });
            }
            GateOp::PauliX { target } => {
                let t = 1 << target;
                for_each_matching(n, &[*target], 0, |i| amps.swap(i, i | t));
            }
            GateOp::MultiControlledX { controls, target } => {
                let (mut fixed, base) = control_mask(controls);
                fixed.push(*target);
                fixed.sort_unstable();
                let t = 1 << target;
                for_each_matching(n, &fixed, base, |i| amps.swap(i, i | t));
            }
            GateOp::MultiControlledHadamard { controls, target } => {
                let (mut fixed, base) = control_mask(controls);
                fixed.push(*target);
                fixed.sort_unstable();
                let t = 1 << target;
                for_each_matching(n, &fixed, base, |i| {
                    let (a, b) = (amps[i], amps[i | t]);
                    amps[i] = (a + b) * FRAC_1_SQRT_2;
                    amps[i | t] = (a - b) * FRAC_1_SQRT_2;
                });
            }
            GateOp::Swap { a, b } => {
                let mut fixed = [*a, *b];
                fixed.sort_unstable();
                let (ba, bb) = (1 << a, 1 << b);
                for_each_matching(n, &fixed, ba, |i| amps.swap(i, (i ^ ba) | bb));
            }
            GateOp::ControlledDiagonal {
                control,
                span,
                diagonal,
            } => {
                if span.contains(control.qubit) {
                    return Err(Error::InvalidGate(
                        "control qubit inside the diagonal span".into(),
                    ));
                }
                let base = (control.value as usize) << control.qubit;
                let mask = span.dim() - 1;
                let start = span.start;
                for_each_matching(n, &[control.qubit], base, |i| {
                    amps[i] *= diagonal[(i >> start) & mask];
                });
            }
            GateOp::AmplitudeLoad { span, values } => {
                let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::ZeroNorm);
                }
                let outside = !(((1usize << span.len) - 1) << span.start);
                if amps
                    .iter()
                    .enumerate()
                    .any(|(i, a)| i & outside != 0 && a.norm_sqr() > 1e-24)
                {
                    return Err(Error::InvalidGate(
                        "amplitude load needs the qubits outside its span in |0>".into(),
                    ));
                }
                for (j, v) in values.iter().enumerate() {
                    amps[j << span.start] = Complex64::new(v / norm, 0.0);
                }
            }
        }
        Ok(())
    }

    /// Unnormalised amplitudes of the free qubits with `fixed` qubits pinned.
    ///
    /// Output index `j` enumerates the free qubits in ascending order.
    pub fn project_read(&self, fixed: &[Control]) -> Result<Vec<Complex64>> {
        if let Some(c) = fixed.iter().find(|c| c.qubit >= self.n_qubits) {
            return Err(Error::QubitOutOfRange {
                qubit: c.qubit,
                n_qubits: self.n_qubits,
            });
        }
        let (qubits, base) = control_mask(fixed);
        if qubits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("qubit fixed twice".into()));
        }
        let mut out = Vec::with_capacity(1 << (self.n_qubits - qubits.len()));
        for_each_matching(self.n_qubits, &qubits, base, |i| out.push(self.amps[i]));
        Ok(out)
    }
}
