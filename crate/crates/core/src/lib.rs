//! Hybrid quantum-classical fractional-step lattice Boltzmann solver.
//!
//! The predictor (τ = 1 collide-stream) runs either classically or as an exactly
//! simulated quantum circuit: amplitude encoding, duplication into direction
//! subspaces, LCU collision, controlled-shift streaming and moment readout.
//! The corrector (anti-diffusion plus buoyancy) always runs classically.
//!
//! Crate layout:
//! - [`lattice`]: D2Q9 / D3Q27 velocity sets.
//! - [`kernels`]: fields, equilibria, collide-stream, stencils, corrector, walls.
//! - [`quantum`]: statevector engine and gate set.
//! - [`circuits`]: circuit construction and the quantum predictor pipelines.
//! - [`solver`]: time loop, residuals, run orchestration.
//! - [`benchmarks`]: case setups, analytic solutions, error norms, Nusselt number.
//! - [`io`]: configuration parsing and CSV / VTK / JSON outputs.

pub mod benchmarks;
pub mod circuits;
pub mod error;
pub mod io;
pub mod kernels;
pub mod lattice;
pub mod quantum;
pub mod solver;

pub use error::{Error, Result};
pub use kernels::{DistributionSet, Grid, MacroState, ScalarField, Stencil, Topology, VectorField};
pub use lattice::{LatticeModel, ModelKind};
pub use solver::{Method, RunConfig};
