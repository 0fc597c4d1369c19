//! Macroscopic wall conditions, re-imposed after each predictor/corrector step.

use serde::{Deserialize, Serialize};

use super::field::{Grid, MacroState, Topology};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMin,
        Face::XMax,
        Face::YMin,
        Face::YMax,
        Face::ZMin,
        Face::ZMax,
    ];

    pub fn axis(self) -> usize {
        self as usize / 2
    }

    pub fn is_max(self) -> bool {
        self as usize % 2 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThermalWall {
    Isothermal(f64),
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WallCondition {
    /// Prescribed wall velocity; `None` means a stationary wall.
    pub velocity: Option<[f64; 3]>,
    /// Thermal condition; walls without one are treated as adiabatic in thermal runs.
    pub thermal: Option<ThermalWall>,
}

/// Wall conditions per face. Faces on periodic axes must stay unset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    walls: [Option<WallCondition>; 6],
}

impl BoundarySpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a no-slip wall at `face` with velocity zero unless set otherwise.
    pub fn wall(mut self, face: Face) -> Self {
        self.walls[face as usize].get_or_insert_with(WallCondition::default);
        self
    }

    pub fn set_velocity(&mut self, face: Face, velocity: [f64; 3]) -> Result<()> {
        let w = self.walls[face as usize].get_or_insert_with(WallCondition::default);
        match w.velocity {
            Some(v) if v != velocity => Err(Error::BoundaryConflict(format!(
                "{face:?} already moves with {v:?}, cannot also move with {velocity:?}"
            ))),
            _ => {
                w.velocity = Some(velocity);
                Ok(())
            }
        }
    }

    pub fn set_thermal(&mut self, face: Face, thermal: ThermalWall) -> Result<()> {
        let w = self.walls[face as usize].get_or_insert_with(WallCondition::default);
        match w.thermal {
            Some(t) if t != thermal => Err(Error::BoundaryConflict(format!(
                "{face:?} is already {t:?}, cannot also be {thermal:?}"
            ))),
            _ => {
                w.thermal = Some(thermal);
                Ok(())
            }
        }
    }

    pub fn condition(&self, face: Face) -> Option<&WallCondition> {
        self.walls[face as usize].as_ref()
    }

    /// Every walled axis needs both faces declared; periodic axes none.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for face in Face::ALL {
            let axis = face.axis();
            let declared = self.walls[face as usize].is_some();
            let walled = axis < grid.dims() && grid.topology(axis) == Topology::Walled;
            if declared != walled {
                return Err(Error::BoundaryConflict(format!(
                    "{face:?} is {} but the axis is {}",
                    if declared { "declared" } else { "missing" },
                    if walled { "walled" } else { "periodic" }
                )));
            }
        }
        Ok(())
    }

    /// Re-imposes the wall values. Wall density and adiabatic temperature are
    /// copied from the adjacent interior node. Faces are applied z, y, then x,
    /// so x-walls own the edges and corners they share.
    pub fn apply(&self, state: &mut MacroState) -> Result<()> {
        let grid = *state.grid();
        self.validate(&grid)?;
        let shape = grid.shape();
        let dims = grid.dims();
        for face in [
            Face::ZMin,
            Face::ZMax,
            Face::YMin,
            Face::YMax,
            Face::XMin,
            Face::XMax,
        ] {
            let Some(cond) = self.walls[face as usize] else {
                continue;
            };
            let axis = face.axis();
            let (layer, inner) = if face.is_max() {
                (shape[axis] - 1, shape[axis] - 2)
            } else {
                (0, 1)
            };
            let velocity = cond.velocity.unwrap_or([0.0; 3]);
            let [a1, a2] = match axis {
                0 => [1, 2],
                1 => [0, 2],
                _ => [0, 1],
            };
            for j in 0..shape[a2] {
                for i in 0..shape[a1] {
                    let mut c = [0usize; 3];
                    c[axis] = layer;
                    c[a1] = i;
                    c[a2] = j;
                    let k = grid.index(c[0], c[1], c[2]);
                    c[axis] = inner;
                    let kin = grid.index(c[0], c[1], c[2]);
                    let r = state.rho.values()[kin];
                    state.rho.values_mut()[k] = r;
                    for (d, &v) in velocity.iter().enumerate().take(dims) {
                        state.u.component_mut(d)[k] = v;
                    }
                    if let Some(t) = state.temperature.as_mut() {
                        let vals = t.values_mut();
                        vals[k] = match cond.thermal {
                            Some(ThermalWall::Isothermal(tw)) => tw,
                            Some(ThermalWall::Adiabatic) | None => vals[kin],
                        };
                    }
                }
            }
        }
        Ok(())
    }
}

/// Shifts the density uniformly so its node mean equals `mean`.
///
/// Wall densities copied from the interior do not conserve mass: a moving
/// lid drains roughly 1e-5 of the mean density per step, enough to stall
/// convergence and eventually push the velocity past the sound speed.
pub fn restore_mean_density(state: &mut MacroState, mean: f64) -> Result<()> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target mean density {mean} must be positive"
        )));
    }
    let rho = state.rho.values_mut();
    let shift = mean - rho.iter().sum::<f64>() / rho.len() as f64;
    rho.iter_mut().for_each(|r| *r += shift);
    Ok(())
}
