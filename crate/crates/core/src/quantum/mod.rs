//! Exact statevector simulation for the gate families the lattice circuits use.

mod gate;
mod layout;
mod state;

pub use gate::{Control, GateOp};
pub use layout::{QubitSpan, RegisterLayout};
pub use state::{StateVector, MAX_QUBITS};
