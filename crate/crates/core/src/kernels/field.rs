use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice sound speed squared shared by both velocity models.
pub const LATTICE_CS2: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    Periodic,
    Walled,
}

/// Uniform Cartesian grid. Node index is `x + Mx * (y + My * z)`.
///
/// 2D grids carry `shape[2] == 1`; the z axis is then inert.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: usize,
    shape: [usize; 3],
    dx: f64,
    dt: f64,
    topology: [Topology; 3],
}

impl Grid {
    pub fn new(shape: &[usize], topology: &[Topology]) -> Result<Self> {
        let dims = shape.len();
        if !(2..=3).contains(&dims) || topology.len() != dims {
            return Err(Error::InvalidGrid(format!(
                "expected 2 or 3 axes with matching topology, got shape {shape:?}, topology {topology:?}"
            )));
        }
        if let Some(&m) = shape.iter().find(|&&m| m < 4) {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 4 nodes, got {m}"
            )));
        }
        let mut s = [1; 3];
        let mut t = [Topology::Periodic; 3];
        s[..dims].copy_from_slice(shape);
        t[..dims].copy_from_slice(topology);
        Ok(Grid {
            dims,
            shape: s,
            dx: 1.0,
            dt: 1.0,
            topology: t,
        })
    }

    pub fn periodic(shape: &[usize]) -> Result<Self> {
        Self::new(shape, &vec![Topology::Periodic; shape.len()])
    }

    pub fn walled(shape: &[usize]) -> Result<Self> {
        Self::new(shape, &vec![Topology::Walled; shape.len()])
    }

    pub fn with_spacing(mut self, dx: f64, dt: f64) -> Result<Self> {
        if !(dx > 0.0 && dt > 0.0 && dx.is_finite() && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dx = {dx}, dt = {dt}")));
        }
        self.dx = dx;
        self.dt = dt;
        Ok(self)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Extent of every axis, padded with 1 for inactive axes.
    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.shape[axis]
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn topology(&self, axis: usize) -> Topology {
        self.topology[axis]
    }

    pub fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.shape[..self.dims].iter().all(|m| m.is_power_of_two())
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.shape[0] * (y + self.shape[1] * z)
    }

    #[inline]
    pub fn coords(&self, k: usize) -> [usize; 3] {
        let x = k % self.shape[0];
        let r = k / self.shape[0];
        [x, r % self.shape[1], r / self.shape[1]]
    }

    /// Node reached from `k` by the integer displacement `e`, wrapping on every axis.
    #[inline]
    pub fn shift_periodic(&self, k: usize, e: [i32; 3]) -> usize {
        let c = self.coords(k);
        let mut out = [0usize; 3];
        for a in 0..3 {
            let m = self.shape[a] as i64;
            out[a] = (c[a] as i64 + e[a] as i64).rem_euclid(m) as usize;
        }
        self.index(out[0], out[1], out[2])
    }

    /// Neighbour along one axis; `None` when stepping through a wall.
    #[inline]
    pub fn neighbor(&self, k: usize, axis: usize, delta: i64) -> Option<usize> {
        let c = self.coords(k);
        let m = self.shape[axis] as i64;
        let p = c[axis] as i64 + delta;
        let p = match self.topology[axis] {
            Topology::Periodic => p.rem_euclid(m),
            Topology::Walled if (0..m).contains(&p) => p,
            Topology::Walled => return None,
        };
        let mut out = c;
        out[axis] = p as usize;
        Some(self.index(out[0], out[1], out[2]))
    }

    /// True when the node lies on the boundary layer of a walled axis.
    #[inline]
    pub fn on_wall(&self, k: usize) -> bool {
        let c = self.coords(k);
        (0..self.dims).any(|a| {
            self.topology[a] == Topology::Walled && (c[a] == 0 || c[a] + 1 == self.shape[a])
        })
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.node_count()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([usize; 3]) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|k| f(grid.coords(k))).collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Euclidean norm of the value vector.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// One scalar array per spatial component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dims()
            || components.iter().any(|c| c.len() != grid.node_count())
        {
            return Err(Error::GridMismatch(format!(
                "vector field needs {} components of {} values",
                grid.dims(),
                grid.node_count()
            )));
        }
        Ok(VectorField { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            grid,
            components: vec![vec![0.0; grid.node_count()]; grid.dims()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([usize; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for k in 0..grid.node_count() {
            let v = f(grid.coords(k));
            for (d, comp) in out.components.iter_mut().enumerate() {
                comp[k] = v[d];
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dims(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, d: usize) -> &[f64] {
        &self.components[d]
    }

    pub fn component_mut(&mut self, d: usize) -> &mut [f64] {
        &mut self.components[d]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Velocity at node `k`, zero-padded to three components.
    #[inline]
    pub fn at(&self, k: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (d, c) in self.components.iter().enumerate() {
            v[d] = c[k];
        }
        v
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.node_count())
            .map(|k| self.at(k).iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Velocity-gradient tensor, `component(i, j)` = ∂u_i/∂x_j.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl TensorField {
    pub(crate) fn from_rows(grid: Grid, rows: Vec<VectorField>) -> Self {
        let components = rows.into_iter().flat_map(|r| r.components).collect();
        TensorField { grid, components }
    }

    pub fn zeros(grid: Grid) -> Self {
        let d = grid.dims();
        TensorField {
            grid,
            components: vec![vec![0.0; grid.node_count()]; d * d],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        &self.components[i * self.grid.dims() + j]
    }

    pub fn component_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let d = self.grid.dims();
        &mut self.components[i * d + j]
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }
}

/// Q values per node, stored direction-major: `values[alpha * nodes + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSet {
    grid: Grid,
    q: usize,
    values: Vec<f64>,
}

impl DistributionSet {
    pub fn new(grid: Grid, q: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != q * grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for {q} directions x {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(DistributionSet { grid, q, values })
    }

    pub fn zeros(grid: Grid, q: usize) -> Self {
        DistributionSet {
            grid,
            q,
            values: vec![0.0; q * grid.node_count()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn direction(&self, alpha: usize) -> &[f64] {
        let n = self.grid.node_count();
        &self.values[alpha * n..(alpha + 1) * n]
    }

    pub fn direction_mut(&mut self, alpha: usize) -> &mut [f64] {
        let n = self.grid.node_count();
        &mut self.values[alpha * n..(alpha + 1) * n]
    }

    #[inline]
    pub fn get(&self, alpha: usize, k: usize) -> f64 {
        self.values[alpha * self.grid.node_count() + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Macroscopic fields. Pressure is implied as `p = cs2 * rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub rho: ScalarField,
    pub u: VectorField,
    pub temperature: Option<ScalarField>,
}

impl MacroState {
    pub fn new(rho: ScalarField, u: VectorField, temperature: Option<ScalarField>) -> Result<Self> {
        rho.grid().check_same(u.grid())?;
        if let Some(t) = &temperature {
            rho.grid().check_same(t.grid())?;
        }
        Ok(MacroState {
            rho,
            u,
            temperature,
        })
    }

    /// Quiescent state with unit density.
    pub fn at_rest(grid: Grid, temperature: Option<f64>) -> Self {
        MacroState {
            rho: ScalarField::constant(grid, 1.0),
            u: VectorField::zeros(grid),
            temperature: temperature.map(|t| ScalarField::constant(grid, t)),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub fn is_thermal(&self) -> bool {
        self.temperature.is_some()
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite()
            && self.u.is_finite()
            && self.temperature.as_ref().is_none_or(|t| t.is_finite())
    }

    /// Checks finiteness, positive density and the low-Mach guard `|u| < cs`.
    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() {
            return Err(Error::NonFinite("density"));
        }
        if !self.u.is_finite() {
            return Err(Error::NonFinite("velocity"));
        }
        if let Some(t) = &self.temperature {
            if !t.is_finite() {
                return Err(Error::NonFinite("temperature"));
            }
        }
        if let Some((node, &value)) = self
            .rho
            .values()
            .iter()
            .enumerate()
            .find(|(_, &r)| r <= 0.0)
        {
            return Err(Error::NonPositiveDensity { node, value });
        }
        let cs = LATTICE_CS2.sqrt();
        let umax = self.u.max_magnitude();
        if umax >= cs {
            return Err(Error::InvalidParameter(format!(
                "max |u| = {umax} exceeds the lattice sound speed"
            )));
        }
        if umax > 0.3 * cs {
            log::warn!("max |u| = {umax:.4} is above 0.3 cs; compressibility errors grow");
        }
        Ok(())
    }

    pub fn pressure(&self) -> ScalarField {
        let mut p = self.rho.clone();
        p.values_mut().iter_mut().for_each(|v| *v *= LATTICE_CS2);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_small_axes() {
        assert!(Grid::periodic(&[3, 8]).is_err());
        assert!(Grid::periodic(&[8]).is_err());
        assert!(Grid::periodic(&[8, 8])
            .unwrap()
            .with_spacing(0.0, 1.0)
            .is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::periodic(&[4, 5, 6]).unwrap();
        for k in 0..g.node_count() {
            let c = g.coords(k);
            assert_eq!(g.index(c[0], c[1], c[2]), k);
        }
        assert_eq!(g.index(1, 2, 3), 1 + 4 * (2 + 5 * 3));
    }

    #[test]
    fn neighbours_wrap_or_stop() {
        let g = Grid::new(&[4, 4], &[Topology::Periodic, Topology::Walled]).unwrap();
        let k = g.index(0, 0, 0);
        assert_eq!(g.neighbor(k, 0, -1), Some(g.index(3, 0, 0)));
        assert_eq!(g.neighbor(k, 1, -1), None);
        assert_eq!(g.shift_periodic(k, [-1, -1, 0]), g.index(3, 3, 0));
        assert!(g.on_wall(k));
        assert!(!g.on_wall(g.index(0, 1, 0)));
    }

    #[test]
    fn macro_validation() {
        let g = Grid::periodic(&[4, 4]).unwrap();
        let mut m = MacroState::at_rest(g, None);
        m.validate().unwrap();
        m.rho.values_mut()[3] = -1.0;
        assert!(matches!(
            m.validate(),
            Err(Error::NonPositiveDensity { node: 3, .. })
        ));
        let mut m = MacroState::at_rest(g, None);
        m.u.component_mut(0)[0] = f64::NAN;
        assert!(m.validate().is_err());
        let mut m = MacroState::at_rest(g, None);
        m.u.component_mut(0)[0] = 0.6;
        assert!(m.validate().is_err());
    }
}
