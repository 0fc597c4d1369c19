//! Benchmark cases: initial and boundary setups, analytic Taylor-Green
//! solution, error norms, convergence order, Nusselt number and centerline
//! profiles.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    gradient_scalar, BoundarySpec, Face, Grid, MacroState, ScalarField, ThermalWall, Topology,
    VectorField, LATTICE_CS2,
};

/// Hot and cold wall temperatures of the natural-convection cases.
pub const T_HOT: f64 = 2.0;
pub const T_COLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Tg2d,
    Tg3d,
    Cavity2d,
    Cavity3d,
    Nc2d,
    Nc3d,
    /// Fully periodic box started from a user-supplied snapshot.
    Custom,
}

impl Case {
    pub const ALL: [Case; 7] = [
        Case::Tg2d,
        Case::Tg3d,
        Case::Cavity2d,
        Case::Cavity3d,
        Case::Nc2d,
        Case::Nc3d,
        Case::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Case::Tg2d => "tg2d",
            Case::Tg3d => "tg3d",
            Case::Cavity2d => "cavity2d",
            Case::Cavity3d => "cavity3d",
            Case::Nc2d => "nc2d",
            Case::Nc3d => "nc3d",
            Case::Custom => "custom",
        }
    }

    pub fn dims(self) -> Option<usize> {
        match self {
            Case::Tg2d | Case::Cavity2d | Case::Nc2d => Some(2),
            Case::Tg3d | Case::Cavity3d | Case::Nc3d => Some(3),
            Case::Custom => None,
        }
    }

    pub fn is_thermal(self) -> bool {
        matches!(self, Case::Nc2d | Case::Nc3d)
    }

    pub fn is_taylor_green(self) -> bool {
        matches!(self, Case::Tg2d | Case::Tg3d)
    }

    pub fn is_walled(self) -> bool {
        matches!(
            self,
            Case::Cavity2d | Case::Cavity3d | Case::Nc2d | Case::Nc3d
        )
    }

    /// Steady cases stop on the residual; Taylor-Green runs a fixed horizon.
    pub fn is_steady(self) -> bool {
        !self.is_taylor_green()
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown case {s:?}")))
    }
}

/// Grid, wall conditions and initial state of a case.
#[derive(Debug, Clone)]
pub struct CaseSetup {
    pub grid: Grid,
    pub boundary: Option<BoundarySpec>,
    pub initial: MacroState,
}

/// Builds the setup of a built-in case on an `n^dims` grid.
///
/// `u_ref` is the Taylor-Green amplitude or the lid speed (ignored for natural
/// convection, which starts at rest with the mean temperature inside).
pub fn setup_case(case: Case, shape: &[usize], u_ref: f64) -> Result<CaseSetup> {
    let dims = case
        .dims()
        .ok_or_else(|| Error::Config("the custom case is set up from a snapshot".into()))?;
    if shape.len() != dims {
        return Err(Error::Config(format!(
            "{case} needs a {dims}D grid, got {shape:?}"
        )));
    }
    match case {
        Case::Tg2d | Case::Tg3d => {
            let grid = Grid::periodic(shape)?;
            let l = half_width(&grid);
            let initial = taylor_green_exact(&grid, 0.0, u_ref, l, 1.0, 1.0, LATTICE_CS2)?;
            Ok(CaseSetup {
                grid,
                boundary: None,
                initial,
            })
        }
        Case::Cavity2d | Case::Cavity3d => {
            let grid = Grid::walled(shape)?;
            let mut spec = walls(dims);
            spec.set_velocity(Face::YMax, [u_ref, 0.0, 0.0])?;
            let mut initial = MacroState::at_rest(grid, None);
            spec.apply(&mut initial)?;
            Ok(CaseSetup {
                grid,
                boundary: Some(spec),
                initial,
            })
        }
        Case::Nc2d | Case::Nc3d => {
            let grid = Grid::walled(shape)?;
            let mut spec = walls(dims);
            spec.set_thermal(Face::XMin, ThermalWall::Isothermal(T_HOT))?;
            spec.set_thermal(Face::XMax, ThermalWall::Isothermal(T_COLD))?;
            for face in &Face::ALL[2..2 * dims] {
                spec.set_thermal(*face, ThermalWall::Adiabatic)?;
            }
            let mut initial = MacroState::at_rest(grid, Some(0.5 * (T_HOT + T_COLD)));
            spec.apply(&mut initial)?;
            Ok(CaseSetup {
                grid,
                boundary: Some(spec),
                initial,
            })
        }
        Case::Custom => unreachable!("rejected above"),
    }
}

fn walls(dims: usize) -> BoundarySpec {
    Face::ALL[..2 * dims]
        .iter()
        .fold(BoundarySpec::new(), |s, f| s.wall(*f))
}

/// Half-width `L` of a periodic `[-L, L]` box along x.
pub fn half_width(grid: &Grid) -> f64 {
    0.5 * grid.extent(0) as f64 * grid.dx()
}

/// Cell-centred coordinate of node `i` in `[-L, L]`.
pub fn cell_centre(i: usize, l: f64, dx: f64) -> f64 {
    -l + (i as f64 + 0.5) * dx
}

/// Decaying Taylor-Green vortex at time `t` (lattice units), sampled at cell
/// centres of `grid`. The flow is independent of z and has `w = 0`.
pub fn taylor_green_exact(
    grid: &Grid,
    t: f64,
    u0: f64,
    l: f64,
    re: f64,
    rho0: f64,
    cs2: f64,
) -> Result<MacroState> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time {t} must be non-negative"
        )));
    }
    let k = PI / l;
    let decay_u = (-2.0 * PI * PI * u0 * t / (re * l)).exp();
    let decay_p = (-4.0 * PI * PI * u0 * t / (re * l)).exp();
    let dx = grid.dx();
    let u = VectorField::from_fn(*grid, |c| {
        let x = cell_centre(c[0], l, dx);
        let y = cell_centre(c[1], l, dx);
        [
            -u0 * (k * x).cos() * (k * y).sin() * decay_u,
            u0 * (k * x).sin() * (k * y).cos() * decay_u,
            0.0,
        ]
    });
    let rho = ScalarField::from_fn(*grid, |c| {
        let x = cell_centre(c[0], l, dx);
        let y = cell_centre(c[1], l, dx);
        rho0 - rho0 * u0 * u0 / (4.0 * cs2) * ((2.0 * k * x).cos() + (2.0 * k * y).cos()) * decay_p
    });
    MacroState::new(rho, u, None)
}

/// `sqrt( sum ((u - u_exact) / u0)^2 / N )` over the x-velocity.
pub fn l2_error(numerical: &MacroState, exact: &MacroState, u0: f64) -> Result<f64> {
    numerical.grid().check_same(exact.grid())?;
    let a = numerical.u.component(0);
    let b = exact.u.component(0);
    let sum: f64 = a.iter().zip(b).map(|(x, y)| ((x - y) / u0).powi(2)).sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// Like [`l2_error`] but summing every velocity component.
pub fn l2_error_all(numerical: &MacroState, exact: &MacroState, u0: f64) -> Result<f64> {
    numerical.grid().check_same(exact.grid())?;
    let mut sum = 0.0;
    for d in 0..numerical.grid().dims() {
        sum += numerical
            .u
            .component(d)
            .iter()
            .zip(exact.u.component(d))
            .map(|(x, y)| ((x - y) / u0).powi(2))
            .sum::<f64>();
    }
    Ok((sum / numerical.grid().node_count() as f64).sqrt())
}

/// Least-squares slope of `log(error)` against `log(1/N)`.
pub fn convergence_order(errors: &[(usize, f64)]) -> Result<f64> {
    if errors.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two grid levels".into(),
        ));
    }
    if let Some((n, e)) = errors.iter().find(|(n, e)| *n == 0 || !(*e > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "error {e} at N = {n} must be positive"
        )));
    }
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .map(|&(n, e)| (-(n as f64).ln(), e.ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all grid levels are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Trapezoid weight of node `i` on an axis of `n` nodes.
/// Average Nusselt number across the cavity,
/// `H / (kappa dT) * mean(u T - kappa dT/dx)`.
///
/// The mean runs over every node with equal weight (midpoint rule);
/// `dT/dx` uses the one-sided second-order closure on the walls.
pub fn average_nusselt(state: &MacroState, kappa: f64, delta_t: f64, h: f64) -> Result<f64> {
    let t = state.temperature.as_ref().ok_or_else(|| {
        Error::InvalidParameter("Nusselt number needs a temperature field".into())
    })?;
    let grad = gradient_scalar(t);
    let sum: f64 = state
        .u
        .component(0)
        .iter()
        .zip(t.values())
        .zip(grad.component(0))
        .map(|((u, tv), dtdx)| u * tv - kappa * dtdx)
        .sum();
    Ok(h / (kappa * delta_t) * sum / t.values().len() as f64)
}

/// Sampled profile with a provenance label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    pub source: String,
    pub quantity: String,
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

impl ReferenceProfile {
    pub fn new(
        source: impl Into<String>,
        quantity: impl Into<String>,
        coords: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if coords.len() != values.len() || coords.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "profile needs matching non-empty columns, got {} and {}",
                coords.len(),
                values.len()
            )));
        }
        let ascending = coords.windows(2).all(|w| w[0] < w[1]);
        let descending = coords.windows(2).all(|w| w[0] > w[1]);
        if !(ascending || descending) {
            return Err(Error::InvalidParameter(
                "profile coordinates must be strictly monotone".into(),
            ));
        }
        if coords.iter().any(|c| !(-1e-12..=1.0 + 1e-12).contains(c)) {
            return Err(Error::InvalidParameter(
                "profile coordinates must lie in [0, 1]".into(),
            ));
        }
        Ok(ReferenceProfile {
            source: source.into(),
            quantity: quantity.into(),
            coords,
            values,
        })
    }

    /// Largest value and its coordinate.
    pub fn max(&self) -> (f64, f64) {
        self.coords.iter().zip(&self.values).fold(
            (f64::NEG_INFINITY, f64::NAN),
            |best, (&c, &v)| if v > best.0 { (v, c) } else { best },
        )
    }

    /// Linear interpolation at `x`; `None` outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let mut pairs: Vec<(f64, f64)> = self
            .coords
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .collect();
        if pairs.len() > 1 && pairs[0].0 > pairs[1].0 {
            pairs.reverse();
        }
        let (lo, hi) = (pairs[0].0, pairs[pairs.len() - 1].0);
        if x < lo - 1e-12 || x > hi + 1e-12 {
            return None;
        }
        if pairs.len() == 1 {
            return Some(pairs[0].1);
        }
        let i = pairs
            .partition_point(|p| p.0 <= x)
            .clamp(1, pairs.len() - 1);
        let (x0, y0) = pairs[i - 1];
        let (x1, y1) = pairs[i];
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Parses the plain-text profile format: `# key: value` header lines
    /// (`source`, `quantity`, anything else is ignored), then one whitespace
    /// separated `coordinate value` pair per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut source = String::new();
        let mut quantity = String::new();
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(h) = line.strip_prefix('#') {
                if let Some((k, v)) = h.split_once(':') {
                    match k.trim() {
                        "source" => source = v.trim().to_string(),
                        "quantity" => quantity = v.trim().to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let nums: Vec<&str> = line.split_whitespace().collect();
            let [c, v] = nums.as_slice() else {
                return Err(Error::Parse(format!(
                    "profile line {}: expected two columns",
                    i + 1
                )));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("profile line {}: bad number {s:?}", i + 1)))
            };
            coords.push(parse(c)?);
            values.push(parse(v)?);
        }
        Self::new(source, quantity, coords, values)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# source: {}\n# quantity: {}\n", self.source, self.quantity);
        for (c, v) in self.coords.iter().zip(&self.values) {
            out.push_str(&format!("{c:?} {v:?}\n"));
        }
        out
    }
}

/// Deviation of `candidate` from `reference` at the reference coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetrics {
    pub max_abs: f64,
    pub rms: f64,
    pub samples: usize,
}

pub fn compare_profiles(
    candidate: &ReferenceProfile,
    reference: &ReferenceProfile,
) -> Result<ProfileMetrics> {
    let diffs: Vec<f64> = reference
        .coords
        .iter()
        .zip(&reference.values)
        .filter_map(|(&x, &r)| candidate.interpolate(x).map(|c| c - r))
        .collect();
    if diffs.is_empty() {
        return Err(Error::InvalidParameter("profiles do not overlap".into()));
    }
    let max_abs = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    Ok(ProfileMetrics {
        max_abs,
        rms,
        samples: diffs.len(),
    })
}

/// Normalised position of node `i` on an axis of `n` nodes: `i / (n - 1)`.
pub fn node_fraction(i: usize, n: usize) -> f64 {
    i as f64 / (n - 1) as f64
}

/// Samples `values` along `axis`, with every other axis held at the given
/// fractional position (linear interpolation between the bracketing nodes).
/// Coordinates are node fractions `i / (n - 1)`.
pub fn sample_line(grid: &Grid, values: &[f64], axis: usize, at: [f64; 3]) -> Vec<(f64, f64)> {
    let shape = grid.shape();
    let mut brackets: [[(usize, f64); 2]; 3] = [[(0, 1.0), (0, 0.0)]; 3];
    for d in 0..grid.dims() {
        if d == axis {
            continue;
        }
        let pos = at[d].clamp(0.0, 1.0) * (shape[d] - 1) as f64;
        let i0 = (pos.floor() as usize).min(shape[d] - 1);
        let i1 = (i0 + 1).min(shape[d] - 1);
        let t = pos - i0 as f64;
        brackets[d] = [(i0, 1.0 - t), (i1, t)];
    }
    (0..shape[axis])
        .map(|i| {
            let mut b = brackets;
            b[axis] = [(i, 1.0), (i, 0.0)];
            let mut v = 0.0;
            for &(x, wx) in &b[0] {
                for &(y, wy) in &b[1] {
                    for &(z, wz) in &b[2] {
                        let w = wx * wy * wz;
                        if w != 0.0 {
                            v += w * values[grid.index(x, y, z)];
                        }
                    }
                }
            }
            (node_fraction(i, shape[axis]), v)
        })
        .collect()
}

/// Which centerline profile to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Centerline {
    /// x-velocity along the vertical line through the centre.
    UAlongY,
    /// y-velocity along the horizontal line through the centre.
    VAlongX,
    /// Temperature along the horizontal line through the centre.
    TAlongX,
}

/// Centerline profile through the domain centre (and the z = 0.5 plane in 3D),
/// with values multiplied by `scale`.
pub fn centerline_extract(
    state: &MacroState,
    which: Centerline,
    scale: f64,
) -> Result<ReferenceProfile> {
    let grid = *state.grid();
    let (values, axis, quantity) = match which {
        Centerline::UAlongY => (state.u.component(0), 1, "u along y"),
        Centerline::VAlongX => (state.u.component(1), 0, "v along x"),
        Centerline::TAlongX => (
            state
                .temperature
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("no temperature field".into()))?
                .values(),
            0,
            "T along x",
        ),
    };
    let line = sample_line(&grid, values, axis, [0.5; 3]);
    ReferenceProfile::new(
        "simulation",
        quantity,
        line.iter().map(|p| p.0).collect(),
        line.iter().map(|p| p.1 * scale).collect(),
    )
}

/// Headline natural-convection metrics, velocities scaled by `H / kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvectionMetrics {
    pub nusselt: f64,
    pub u_max: f64,
    pub y_at_u_max: f64,
    pub v_max: f64,
    pub x_at_v_max: f64,
}

pub fn convection_metrics(state: &MacroState, kappa: f64, h: f64) -> Result<ConvectionMetrics> {
    let nusselt = average_nusselt(state, kappa, T_HOT - T_COLD, h)?;
    let scale = h / kappa;
    let (u_max, y) = centerline_extract(state, Centerline::UAlongY, scale)?.max();
    let (v_max, x) = centerline_extract(state, Centerline::VAlongX, scale)?.max();
    Ok(ConvectionMetrics {
        nusselt,
        u_max,
        y_at_u_max: y,
        v_max,
        x_at_v_max: x,
    })
}

/// Characteristic length of a walled box: the wall-to-wall node distance
/// `(N - 1) dx`, or `N dx` when `nodes` is set.
pub fn wall_length(grid: &Grid, nodes: bool) -> f64 {
    let n = grid.extent(0) as f64;
    if nodes {
        n * grid.dx()
    } else {
        (n - 1.0) * grid.dx()
    }
}

/// True when every axis of `grid` is walled.
pub fn is_closed_box(grid: &Grid) -> bool {
    (0..grid.dims()).all(|d| grid.topology(d) == Topology::Walled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::gradient_vector;

    #[test]
    fn taylor_green_values() {
        let g = Grid::periodic(&[16, 16]).unwrap();
        let l = half_width(&g);
        let s = taylor_green_exact(&g, 0.0, 0.1, l, 10.0, 1.0, LATTICE_CS2).unwrap();
        // exact point (0, L/2) is not a cell centre; evaluate the formula there
        let k = PI / l;
        let u = -0.1 * (k * 0.0).cos() * (k * l / 2.0).sin();
        assert!((u + 0.1).abs() < 1e-15);
        assert!(s.u.component(0).iter().all(|v| v.abs() <= 0.1));
        let t = 200.0;
        let later = taylor_green_exact(&g, t, 0.1, l, 10.0, 1.0, LATTICE_CS2).unwrap();
        let factor = (-2.0 * PI * PI * 0.1 * t / (10.0 * l)).exp();
        for (a, b) in later.u.component(1).iter().zip(s.u.component(1)) {
            assert!((a - factor * b).abs() < 1e-16);
        }
        let g3 = Grid::periodic(&[8, 8, 8]).unwrap();
        let s3 = taylor_green_exact(&g3, 5.0, 0.1, 4.0, 10.0, 1.0, LATTICE_CS2).unwrap();
        assert!(s3.u.component(2).iter().all(|&w| w == 0.0));
        assert!(taylor_green_exact(&g, -1.0, 0.1, l, 10.0, 1.0, LATTICE_CS2).is_err());
    }

    #[test]
    fn taylor_green_divergence_converges() {
        let mut prev = None;
        for n in [16usize, 32, 64] {
            let g = Grid::periodic(&[n, n]).unwrap();
            let s =
                taylor_green_exact(&g, 0.0, 0.1, half_width(&g), 10.0, 1.0, LATTICE_CS2).unwrap();
            let grad = gradient_vector(&s.u);
            let div = (0..g.node_count())
                .map(|k| (grad.component(0, 0)[k] + grad.component(1, 1)[k]).abs())
                .fold(0.0, f64::max);
            if let Some(p) = prev {
                // both terms carry O(dx^2) errors of opposite sign that cancel;
                // the divergence must not grow under refinement
                assert!(div <= p + 1e-15, "{div} vs {p}");
            }
            prev = Some(div);
        }
    }

    #[test]
    fn l2_examples() {
        let g = Grid::periodic(&[4, 4]).unwrap();
        let exact = MacroState::at_rest(g, None);
        assert_eq!(l2_error(&exact, &exact, 0.1).unwrap(), 0.0);
        let mut off = exact.clone();
        off.u.component_mut(0).iter_mut().for_each(|v| *v = 0.01);
        assert!((l2_error(&off, &exact, 0.1).unwrap() - 0.1).abs() < 1e-15);
        let mut alt = exact.clone();
        alt.u
            .component_mut(0)
            .iter_mut()
            .enumerate()
            .for_each(|(k, v)| *v = if k % 2 == 0 { 0.01 } else { -0.01 });
        assert!((l2_error(&alt, &exact, 0.1).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn order_of_power_laws() {
        let two: Vec<(usize, f64)> = [8usize, 16, 32, 64]
            .iter()
            .map(|&n| (n, 3.0 / (n * n) as f64))
            .collect();
        assert!((convergence_order(&two).unwrap() - 2.0).abs() < 1e-12);
        let one: Vec<(usize, f64)> = [8usize, 16, 32]
            .iter()
            .map(|&n| (n, 0.5 / n as f64))
            .collect();
        assert!((convergence_order(&one).unwrap() - 1.0).abs() < 1e-12);
        assert!(convergence_order(&[(8, 0.1)]).is_err());
        assert!(convergence_order(&[(8, 0.1), (16, 0.0)]).is_err());
    }

    #[test]
    fn nusselt_limits() {
        let g = Grid::walled(&[33, 33]).unwrap();
        let h = wall_length(&g, false);
        let linear = ScalarField::from_fn(g, |c| T_HOT - (T_HOT - T_COLD) * c[0] as f64 / 32.0);
        let s = MacroState::new(
            ScalarField::constant(g, 1.0),
            VectorField::zeros(g),
            Some(linear),
        )
        .unwrap();
        assert!((average_nusselt(&s, 0.05, 1.0, h).unwrap() - 1.0).abs() < 1e-12);
        let uniform = MacroState::at_rest(g, Some(1.5));
        assert_eq!(average_nusselt(&uniform, 0.05, 1.0, h).unwrap(), 0.0);
    }

    #[test]
    fn profile_comparison() {
        let r =
            ReferenceProfile::new("ref", "u", vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let m = compare_profiles(&r, &r).unwrap();
        assert_eq!((m.max_abs, m.rms), (0.0, 0.0));
        let shifted =
            ReferenceProfile::new("c", "u", vec![0.0, 0.5, 1.0], vec![0.1, 1.1, 0.1]).unwrap();
        assert!((compare_profiles(&shifted, &r).unwrap().max_abs - 0.1).abs() < 1e-15);
        let far = ReferenceProfile::new("c", "u", vec![0.0, 0.1], vec![0.0, 0.0]).unwrap();
        let tail = ReferenceProfile::new("r", "u", vec![0.5, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(compare_profiles(&far, &tail).is_err());
        assert!(ReferenceProfile::new("x", "u", vec![0.0, 0.5, 0.2], vec![0.0; 3]).is_err());
        let text = r.to_text();
        assert_eq!(ReferenceProfile::parse(&text).unwrap(), r);
    }

    #[test]
    fn centerline_interpolates_between_nodes() {
        let g = Grid::walled(&[8, 8]).unwrap();
        // u = x index: the centre line x = 3.5 averages columns 3 and 4
        let s = MacroState::new(
            ScalarField::constant(g, 1.0),
            VectorField::from_fn(g, |c| [c[0] as f64, c[1] as f64, 0.0]),
            None,
        )
        .unwrap();
        let p = centerline_extract(&s, Centerline::UAlongY, 1.0).unwrap();
        assert!(p.values.iter().all(|&v| (v - 3.5).abs() < 1e-15));
        let q = centerline_extract(&s, Centerline::VAlongX, 2.0).unwrap();
        assert!(q.values.iter().all(|&v| (v - 7.0).abs() < 1e-15));
        assert_eq!(q.coords[7], 1.0);
    }

    #[test]
    fn tg_centerline_is_antisymmetric() {
        let g = Grid::periodic(&[16, 16]).unwrap();
        let s = taylor_green_exact(&g, 0.0, 0.1, 8.0, 10.0, 1.0, LATTICE_CS2).unwrap();
        let p = centerline_extract(&s, Centerline::UAlongY, 1.0).unwrap();
        let n = p.values.len();
        for i in 0..n {
            assert!((p.values[i] + p.values[n - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn case_setups() {
        let c = setup_case(Case::Cavity2d, &[8, 8], 0.1).unwrap();
        assert_eq!(c.initial.u.component(0)[c.grid.index(3, 7, 0)], 0.1);
        let nc = setup_case(Case::Nc3d, &[8, 8, 8], 0.0).unwrap();
        let t = nc.initial.temperature.unwrap();
        assert_eq!(t.values()[nc.grid.index(0, 3, 3)], T_HOT);
        assert_eq!(t.values()[nc.grid.index(7, 3, 3)], T_COLD);
        assert!(setup_case(Case::Tg2d, &[8, 8, 8], 0.1).is_err());
        assert_eq!("NC2D".parse::<Case>().unwrap(), Case::Nc2d);
    }
}
