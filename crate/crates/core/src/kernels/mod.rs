//! Classical field containers and per-step numerical kernels.

mod boundary;
mod corrector;
mod equilibrium;
mod field;
mod stencil;

pub use boundary::{restore_mean_density, BoundarySpec, Face, ThermalWall, WallCondition};
pub use corrector::{
    apply_force, buoyancy, corrector_update, intrinsic_viscosity, CorrectorParams, VERTICAL_AXIS,
};
pub use equilibrium::{
    collide_stream, equilibrium, lks_constants, lks_equilibrium, lks_transport, moments, stream,
    EdfKind, FieldKind,
};
pub use field::{
    DistributionSet, Grid, MacroState, ScalarField, TensorField, Topology, VectorField, LATTICE_CS2,
};
pub use stencil::{gradient_scalar, gradient_vector, laplacian_scalar, laplacian_vector, Stencil};
