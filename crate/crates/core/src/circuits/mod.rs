//! Lattice circuits: duplication, LCU collision, controlled-shift streaming,
//! moment summation, and the predictor pipelines built from them.

mod dump;
mod duplication;
mod pipeline;
mod predictor;

pub use dump::{dump_circuit, format_gate, parse_circuit, parse_gate};
pub use duplication::{build_duplication, DuplicationPlan};
pub use pipeline::{
    collision_diagonal, lcu_collision, lcu_gates, macroscopic_sum, plan_layout, read_density,
    read_distributions, shift_gates, streaming, streaming_gates, summation_gates, Circuit,
    CircuitVariant, LksInputs, QLbmCircuitPlan,
};
pub use predictor::{QuantumMethod, QuantumPredictor, NORM_TOLERANCE};
