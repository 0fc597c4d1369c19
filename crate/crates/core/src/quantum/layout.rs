use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Grid;
use crate::lattice::LatticeModel;

/// Contiguous run of qubits `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitSpan {
    pub start: usize,
    pub len: usize,
}

impl QubitSpan {
    pub fn new(start: usize, len: usize) -> Self {
        QubitSpan { start, len }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn contains(&self, q: usize) -> bool {
        (self.start..self.end()).contains(&q)
    }

    pub fn dim(&self) -> usize {
        1 << self.len
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        self.start..self.end()
    }
}

/// Qubit register layout of one lattice circuit.
///
/// Qubit 0 is the least significant bit of the x register; registers ascend
/// x, y, (z), direction, ancilla. A basis index therefore reads
/// `a · 2^(nQ + Ninit) + alpha · 2^Ninit + k` with `k = x + Mx (y + My z)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    axis_qubits: Vec<usize>,
    n_q: usize,
}

impl RegisterLayout {
    pub fn new(axis_qubits: Vec<usize>, n_q: usize) -> Result<Self> {
        if axis_qubits.is_empty() || axis_qubits.contains(&0) || n_q == 0 {
            return Err(Error::InvalidParameter(format!(
                "register sizes must be positive: axes {axis_qubits:?}, direction {n_q}"
            )));
        }
        Ok(RegisterLayout { axis_qubits, n_q })
    }

    /// `n_d = log2 M_d` per axis, `nQ = ceil(log2 Q)`, one ancilla.
    pub fn for_grid(model: &LatticeModel, grid: &Grid) -> Result<Self> {
        if model.dims() != grid.dims() {
            return Err(Error::InvalidParameter(format!(
                "{:?} needs a {}D grid",
                model.kind(),
                model.dims()
            )));
        }
        let mut axis_qubits = Vec::with_capacity(grid.dims());
        for d in 0..grid.dims() {
            let m = grid.extent(d);
            if !m.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(m));
            }
            axis_qubits.push(m.trailing_zeros() as usize);
        }
        let n_q = model.q().next_power_of_two().trailing_zeros() as usize;
        Self::new(axis_qubits, n_q)
    }

    pub fn dims(&self) -> usize {
        self.axis_qubits.len()
    }

    pub fn axis_qubits(&self) -> &[usize] {
        &self.axis_qubits
    }

    pub fn axis_span(&self, axis: usize) -> QubitSpan {
        let start = self.axis_qubits[..axis].iter().sum();
        QubitSpan::new(start, self.axis_qubits[axis])
    }

    /// Total position qubits (`N_init`).
    pub fn n_init(&self) -> usize {
        self.axis_qubits.iter().sum()
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn n_ancilla(&self) -> usize {
        1
    }

    pub fn n_total(&self) -> usize {
        self.n_init() + self.n_q + self.n_ancilla()
    }

    pub fn position_span(&self) -> QubitSpan {
        QubitSpan::new(0, self.n_init())
    }

    pub fn direction_span(&self) -> QubitSpan {
        QubitSpan::new(self.n_init(), self.n_q)
    }

    pub fn ancilla(&self) -> usize {
        self.n_init() + self.n_q
    }

    /// Global basis index of `|a>|alpha>|k>`.
    pub fn basis_index(&self, ancilla: bool, direction_state: usize, node: usize) -> usize {
        ((ancilla as usize) << (self.n_init() + self.n_q))
            | (direction_state << self.n_init())
            | node
    }
}
