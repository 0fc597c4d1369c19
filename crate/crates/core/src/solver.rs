//! Time loop: predictor (classical or quantum), corrector, walls, residuals.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::benchmarks::{half_width, setup_case, wall_length, Case, T_COLD, T_HOT};
use crate::circuits::{QuantumMethod, QuantumPredictor};
use crate::error::{Error, Result};
use crate::kernels::{
    apply_force, buoyancy, collide_stream, corrector_update, intrinsic_viscosity, lks_constants,
    moments, restore_mean_density, BoundarySpec, CorrectorParams, EdfKind, FieldKind, Grid,
    MacroState, ScalarField, Stencil, LATTICE_CS2,
};
use crate::lattice::{LatticeModel, ModelKind};

/// Residual above which a run counts as diverged.
pub const DIVERGENCE_RESIDUAL: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    ClassicalFs,
    ClassicalLks,
    QuantumFsI,
    QuantumFsII,
    QuantumLksI,
    QuantumLksII,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::ClassicalFs,
        Method::ClassicalLks,
        Method::QuantumFsI,
        Method::QuantumFsII,
        Method::QuantumLksI,
        Method::QuantumLksII,
    ];

    /// Short command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Method::ClassicalFs => "cfs",
            Method::ClassicalLks => "clks",
            Method::QuantumFsI => "qfs1",
            Method::QuantumFsII => "qfs2",
            Method::QuantumLksI => "qlks1",
            Method::QuantumLksII => "qlks2",
        }
    }

    pub fn is_lks(self) -> bool {
        matches!(
            self,
            Method::ClassicalLks | Method::QuantumLksI | Method::QuantumLksII
        )
    }

    pub fn quantum(self) -> Option<QuantumMethod> {
        match self {
            Method::ClassicalFs | Method::ClassicalLks => None,
            Method::QuantumFsI => Some(QuantumMethod::FsI),
            Method::QuantumFsII => Some(QuantumMethod::FsII),
            Method::QuantumLksI => Some(QuantumMethod::LksI),
            Method::QuantumLksII => Some(QuantumMethod::LksII),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method {s:?} (expected cfs, clks, qfs1, qfs2, qlks1 or qlks2)"
                ))
            })
    }
}

/// Characteristic length of the walled cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum LengthConvention {
    /// Wall-node to wall-node distance, `(N - 1) dx`.
    #[default]
    Intervals,
    /// Node count times spacing, `N dx`.
    Nodes,
}

impl LengthConvention {
    pub fn name(self) -> &'static str {
        match self {
            LengthConvention::Intervals => "n-1",
            LengthConvention::Nodes => "n",
        }
    }
}

impl FromStr for LengthConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n-1" => Ok(LengthConvention::Intervals),
            "n" => Ok(LengthConvention::Nodes),
            _ => Err(Error::Config(format!(
                "length convention {s:?} is neither \"n\" nor \"n-1\""
            ))),
        }
    }
}

/// Everything that defines a run. Unset optional fields take per-case defaults
/// in [`derive_params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub case: Case,
    pub shape: Vec<usize>,
    /// Reynolds number (isothermal cases).
    pub re: Option<f64>,
    /// Rayleigh number (natural convection).
    pub ra: Option<f64>,
    pub pr: f64,
    pub g_beta: f64,
    /// Taylor-Green amplitude or lid speed.
    pub u_ref: f64,
    /// `None` picks CD, or SS for the 3D cavity, and retries with SS when CD diverges.
    pub stencil: Option<Stencil>,
    pub epsilon: Option<f64>,
    pub max_steps: usize,
    /// Taylor-Green horizon in units of `L / u0`.
    pub t_star: f64,
    pub length: LengthConvention,
    /// Explicit viscosity; required by the custom case, overrides Re otherwise.
    pub nu: Option<f64>,
    /// Explicit diffusivity for custom thermal runs.
    pub kappa: Option<f64>,
    /// Initial snapshot for the custom case.
    pub initial: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Snapshot cadence in steps; 0 writes only the final state.
    pub snapshot_every: usize,
    /// Convergence-log cadence in steps.
    pub log_every: usize,
    pub vtk: bool,
}

impl RunConfig {
    /// Defaults for `case` on an `n^dims` grid: Re = 10 for Taylor-Green,
    /// Re = 100 for the cavity, Ra = 10^3 for natural convection.
    pub fn new(case: Case, method: Method, n: usize) -> Self {
        let dims = case.dims().unwrap_or(2);
        let (re, ra) = match case {
            Case::Tg2d | Case::Tg3d => (Some(10.0), None),
            Case::Cavity2d | Case::Cavity3d => (Some(100.0), None),
            Case::Nc2d | Case::Nc3d => (None, Some(1e3)),
            Case::Custom => (None, None),
        };
        RunConfig {
            method,
            case,
            shape: vec![n; dims],
            re,
            ra,
            pr: 0.71,
            g_beta: 1e-5,
            u_ref: default_u_ref(case),
            stencil: None,
            epsilon: None,
            max_steps: 2_000_000,
            t_star: 1.0,
            length: LengthConvention::default(),
            nu: None,
            kappa: None,
            initial: None,
            out_dir: None,
            snapshot_every: 0,
            log_every: 1,
            vtk: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Config(format!("epsilon {e} must lie in (0, 1)")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if self.log_every == 0 {
            return Err(Error::Config("log_every must be at least 1".into()));
        }
        if self.shape.is_empty() || self.shape.len() > 3 {
            return Err(Error::Config(format!(
                "grid shape {:?} must have 2 or 3 axes",
                self.shape
            )));
        }
        if let Some(d) = self.case.dims() {
            if self.shape.len() != d {
                return Err(Error::Config(format!(
                    "{} needs a {d}D grid, got {:?}",
                    self.case, self.shape
                )));
            }
        }
        if self.case.is_thermal() {
            if self.ra.is_none() {
                return Err(Error::Config(format!(
                    "{} needs a Rayleigh number",
                    self.case
                )));
            }
            if self.re.is_some() {
                return Err(Error::Config(format!(
                    "{} takes Ra and Pr, not Re",
                    self.case
                )));
            }
            if !(self.pr > 0.0 && self.g_beta > 0.0) {
                return Err(Error::Config("Pr and g_beta must be positive".into()));
            }
        } else if self.case == Case::Custom {
            if self.nu.is_none() || self.initial.is_none() {
                return Err(Error::Config(
                    "the custom case needs nu and an initial snapshot".into(),
                ));
            }
        } else {
            if self.re.is_none() && self.nu.is_none() {
                return Err(Error::Config(format!(
                    "{} needs a Reynolds number",
                    self.case
                )));
            }
            if self.ra.is_some() {
                return Err(Error::Config(format!(
                    "{} is isothermal and takes no Rayleigh number",
                    self.case
                )));
            }
        }
        for (name, v) in [
            ("re", self.re),
            ("ra", self.ra),
            ("nu", self.nu),
            ("kappa", self.kappa),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} = {v} must be positive")));
                }
            }
        }
        if !(self.u_ref.is_finite() && self.u_ref.abs() < LATTICE_CS2.sqrt()) {
            return Err(Error::Config(format!(
                "reference speed {} must stay below the sound speed",
                self.u_ref
            )));
        }
        if self.method.quantum().is_some() {
            if let Some(&m) = self.shape.iter().find(|m| !m.is_power_of_two()) {
                return Err(Error::NotPowerOfTwo(m));
            }
        }
        Ok(())
    }
}

/// Transport coefficients and run constants resolved from a [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub nu: f64,
    pub kappa: f64,
    /// Characteristic length (`L` for Taylor-Green, `H` for walled boxes).
    pub length: f64,
    pub thermal: bool,
    pub g_beta: f64,
    pub t_mean: f64,
    /// `(A, B)` of the LKS equilibria.
    pub lks: Option<(f64, f64)>,
    /// Fixed step count of unsteady runs.
    pub horizon: Option<usize>,
    pub epsilon: f64,
}

/// Resolves transport coefficients: `nu = u_ref L / Re` for isothermal
/// cases, `nu = sqrt(Pr g_beta dT H^3 / Ra)` and `kappa = nu / Pr` for natural
/// convection.
pub fn derive_params(config: &RunConfig) -> Result<DerivedParams> {
    config.validate()?;
    let dims = config.shape.len();
    let topo_grid = Grid::periodic(&config.shape)?;
    let star = intrinsic_viscosity(&topo_grid);
    let length = match config.case {
        Case::Tg2d | Case::Tg3d | Case::Custom => half_width(&topo_grid),
        _ => wall_length(&topo_grid, config.length == LengthConvention::Nodes),
    };
    let thermal = config.case.is_thermal();
    let (nu, kappa) = if thermal {
        let ra = config.ra.expect("validated");
        let dt_wall = T_HOT - T_COLD;
        let nu = (config.pr * config.g_beta * dt_wall * length.powi(3) / ra).sqrt();
        (nu, nu / config.pr)
    } else if let Some(nu) = config.nu {
        (nu, config.kappa.unwrap_or(star))
    } else {
        let re = config.re.expect("validated");
        (config.u_ref.abs() * length / re, star)
    };
    if !(nu > 0.0 && kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "derived nu = {nu}, kappa = {kappa} must be positive"
        )));
    }
    let lks = if config.method.is_lks() {
        Some(lks_constants(nu, kappa, topo_grid.dt(), LATTICE_CS2)?)
    } else {
        None
    };
    let horizon = config.case.is_taylor_green().then(|| {
        let steps = config.t_star * length / (config.u_ref.abs() * topo_grid.dt());
        (steps - 1e-9).ceil().max(1.0) as usize
    });
    let epsilon = config.epsilon.unwrap_or(if thermal { 1e-7 } else { 1e-6 });
    let _ = dims;
    Ok(DerivedParams {
        nu,
        kappa,
        length,
        thermal,
        g_beta: config.g_beta,
        t_mean: 0.5 * (T_HOT + T_COLD),
        lks,
        horizon,
        epsilon,
    })
}

/// Stencil used when the configuration leaves it open.
/// Default characteristic velocity: the lid speed for the cavity, and a
/// slower vortex for Taylor-Green. Above about 0.05 the Taylor-Green viscosity
/// at N = 64 exceeds the predictor's 1/6 and the corrector's (pi, 0) mode grows;
/// near that limit the Mach-dependent viscosity error also masks the
/// second-order truncation error on coarse grids.
pub fn default_u_ref(case: Case) -> f64 {
    match case {
        Case::Tg2d | Case::Tg3d => 0.005,
        _ => 0.1,
    }
}

pub fn default_stencil(case: Case) -> Stencil {
    match case {
        Case::Cavity3d => Stencil::Ss,
        _ => Stencil::Cd,
    }
}

/// `sqrt( sum |u' - u|^2 + (T' - T)^2 / sum |u'|^2 + T'^2 )`.
///
/// Returns `+inf` (with a warning) when the new field is identically zero.
pub fn residual(prev: &MacroState, curr: &MacroState, thermal: bool) -> Result<f64> {
    prev.grid().check_same(curr.grid())?;
    let mut num = 0.0;
    let mut den = 0.0;
    for d in 0..curr.grid().dims() {
        for (a, b) in curr.u.component(d).iter().zip(prev.u.component(d)) {
            num += (a - b) * (a - b);
            den += a * a;
        }
    }
    if thermal {
        if let (Some(t1), Some(t0)) = (&curr.temperature, &prev.temperature) {
            for (a, b) in t1.values().iter().zip(t0.values()) {
                num += (a - b) * (a - b);
                den += a * a;
            }
        }
    }
    if den == 0.0 {
        warn!("residual undefined for an all-quiescent field");
        return Ok(f64::INFINITY);
    }
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Steady run whose residual fell below epsilon.
    Converged,
    /// Unsteady run that reached its fixed horizon.
    Completed,
    MaxSteps,
    Diverged,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::Completed => "completed",
            RunStatus::MaxSteps => "max_steps",
            RunStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub residual: f64,
    pub nusselt: Option<f64>,
    /// Seconds since the run started; kept out of the CSV log for determinism.
    pub wall_time: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLog {
    pub records: Vec<StepRecord>,
    pub status: Option<RunStatus>,
    /// Why the run diverged, if it did.
    pub reason: Option<String>,
}

impl ConvergenceLog {
    pub fn last_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.residual)
    }

    pub fn steps(&self) -> usize {
        self.records.last().map_or(0, |r| r.step)
    }
}

/// One configured simulation advanced step by step.
#[derive(Debug, Clone)]
pub struct Solver {
    config: RunConfig,
    params: DerivedParams,
    model: LatticeModel,
    boundary: Option<BoundarySpec>,
    state: MacroState,
    steps: usize,
    stencil: Stencil,
    quantum: Option<QuantumPredictor>,
}

impl Solver {
    /// Sets up a run from its configuration, using `stencil` for the corrector
    /// Laplacian (or the case default when `None`).
    pub fn new(config: &RunConfig, stencil: Option<Stencil>) -> Result<Self> {
        let params = derive_params(config)?;
        let (boundary, state) = if config.case == Case::Custom {
            let path = config.initial.as_ref().expect("validated");
            let state = crate::io::read_snapshot_csv(path, Some(&config.shape))?;
            (None, state)
        } else {
            let setup = setup_case(config.case, &config.shape, config.u_ref)?;
            (setup.boundary, setup.initial)
        };
        Self::from_state(config, params, boundary, state, stencil)
    }

    /// Starts from an explicit state (periodic unless `boundary` is given).
    pub fn from_state(
        config: &RunConfig,
        params: DerivedParams,
        boundary: Option<BoundarySpec>,
        state: MacroState,
        stencil: Option<Stencil>,
    ) -> Result<Self> {
        let dims = state.grid().dims();
        let model = LatticeModel::new(
            ModelKind::for_dims(dims).ok_or_else(|| Error::InvalidGrid(format!("{dims}D grid")))?,
        );
        if let Some(b) = &boundary {
            b.validate(state.grid())?;
        }
        if params.thermal != state.is_thermal() {
            return Err(Error::InvalidParameter(
                "thermal flag and temperature field disagree".into(),
            ));
        }
        state.validate()?;
        let quantum = config
            .method
            .quantum()
            .map(|_| QuantumPredictor::new(model.clone()));
        Ok(Solver {
            config: config.clone(),
            params,
            model,
            boundary,
            state,
            steps: 0,
            stencil: stencil
                .or(config.stencil)
                .unwrap_or_else(|| default_stencil(config.case)),
            quantum,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn params(&self) -> &DerivedParams {
        &self.params
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        self.state.grid()
    }

    pub fn state(&self) -> &MacroState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn predictor(&self) -> Option<&QuantumPredictor> {
        self.quantum.as_ref()
    }

    /// Predictor output `(rho_bar, u_bar[, T_bar])`.
    pub fn predict(&mut self) -> Result<MacroState> {
        let state = &self.state;
        if let (Some(qp), Some(qm)) = (self.quantum.as_mut(), self.config.method.quantum()) {
            return qp.predict(state, qm, self.params.lks);
        }
        let edf = match self.params.lks {
            Some((a, b)) => EdfKind::Lks { a, b },
            None => EdfKind::Standard,
        };
        let f = collide_stream(state, &self.model, FieldKind::Flow, edf)?;
        let (rho, mut u) = moments(&f, &self.model);
        for d in 0..state.grid().dims() {
            for (v, r) in u.component_mut(d).iter_mut().zip(rho.values()) {
                *v /= r;
            }
        }
        let temperature = match &state.temperature {
            None => None,
            Some(_) => {
                let h = collide_stream(state, &self.model, FieldKind::Thermal, edf)?;
                let mut t = ScalarField::constant(*state.grid(), 0.0);
                for alpha in 0..self.model.q() {
                    for (o, v) in t.values_mut().iter_mut().zip(h.direction(alpha)) {
                        *o += v;
                    }
                }
                Some(t)
            }
        };
        Ok(MacroState {
            rho,
            u,
            temperature,
        })
    }

    /// Advances one time step and returns the residual against the previous state.
    pub fn step(&mut self) -> Result<f64> {
        let predicted = self.predict()?;
        let prev = &self.state;
        let force = match &prev.temperature {
            Some(t) if self.params.thermal => Some(buoyancy(
                t,
                &prev.rho,
                self.params.g_beta,
                self.params.t_mean,
            )?),
            _ => None,
        };
        let mut next = if self.config.method.is_lks() {
            let mut s = predicted;
            if let Some(f) = &force {
                apply_force(&mut s, f)?;
            }
            s
        } else {
            let params = CorrectorParams {
                nu: self.params.nu,
                kappa: self.params.kappa,
                stencil: self.stencil,
            };
            corrector_update(&predicted, prev, &params, force.as_ref())?
        };
        if let Some(b) = &self.boundary {
            b.apply(&mut next)?;
            let n = self.state.rho.values().len() as f64;
            restore_mean_density(&mut next, self.state.rho.values().iter().sum::<f64>() / n)?;
        }
        next.validate()?;
        let r = residual(&self.state, &next, self.params.thermal)?;
        self.state = next;
        self.steps += 1;
        Ok(r)
    }
}

/// Final state and history of a run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: MacroState,
    pub log: ConvergenceLog,
    pub params: DerivedParams,
    pub stencil: Stencil,
    /// True when the automatic stencil choice restarted the run with SS.
    pub stencil_fallback: bool,
    pub quantum_executions: u64,
}

impl RunOutcome {
    pub fn status(&self) -> RunStatus {
        self.log.status.expect("finished runs carry a status")
    }
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    run_with(config, |_, _| Ok(()))
}

/// Runs to convergence, horizon, step limit or divergence, calling `observer`
/// after every logged step. When the stencil is left automatic and a CD run
/// diverges, the run restarts from scratch with SS.
pub fn run_with(
    config: &RunConfig,
    mut observer: impl FnMut(&Solver, &StepRecord) -> Result<()>,
) -> Result<RunOutcome> {
    let first = run_once(config, config.stencil, &mut observer)?;
    let auto = config.stencil.is_none();
    if auto && first.status() == RunStatus::Diverged && first.stencil == Stencil::Cd {
        info!(
            "CD run diverged ({}); restarting with the SS stencil",
            first.log.reason.as_deref().unwrap_or("?")
        );
        let mut second = run_once(config, Some(Stencil::Ss), &mut observer)?;
        second.stencil_fallback = true;
        return Ok(second);
    }
    Ok(first)
}

fn run_once(
    config: &RunConfig,
    stencil: Option<Stencil>,
    observer: &mut impl FnMut(&Solver, &StepRecord) -> Result<()>,
) -> Result<RunOutcome> {
    let mut solver = Solver::new(config, stencil)?;
    let params = *solver.params();
    let start = Instant::now();
    let mut log = ConvergenceLog::default();
    let limit = params.horizon.unwrap_or(config.max_steps);
    info!(
        "{} {} {:?}: nu = {:.6e}, kappa = {:.6e}, stencil {:?}, {} steps max",
        config.case,
        config.method,
        config.shape,
        params.nu,
        params.kappa,
        solver.stencil(),
        limit
    );
    let record = |solver: &Solver, r: f64| StepRecord {
        step: solver.steps(),
        residual: r,
        nusselt: params.thermal.then(|| {
            crate::benchmarks::average_nusselt(
                solver.state(),
                params.kappa,
                T_HOT - T_COLD,
                params.length,
            )
            .unwrap_or(f64::NAN)
        }),
        wall_time: start.elapsed().as_secs_f64(),
    };
    let status = loop {
        let r = match solver.step() {
            Ok(r) => r,
            Err(e) => {
                warn!("step {} failed: {e}", solver.steps() + 1);
                log.reason = Some(e.to_string());
                break RunStatus::Diverged;
            }
        };
        let diverged = r.is_nan() || (r.is_finite() && r > DIVERGENCE_RESIDUAL);
        let steady_done = params.horizon.is_none() && r < params.epsilon;
        let done = diverged || steady_done || solver.steps() >= limit;
        if done || solver.steps() % config.log_every == 0 {
            let rec = record(&solver, r);
            debug!("step {} residual {:.3e}", rec.step, rec.residual);
            log.records.push(rec);
            observer(&solver, &rec)?;
        }
        if diverged {
            log.reason = Some(format!("residual {r:e} at step {}", solver.steps()));
            break RunStatus::Diverged;
        }
        if steady_done {
            break RunStatus::Converged;
        }
        if solver.steps() >= limit {
            break if params.horizon.is_some() {
                RunStatus::Completed
            } else {
                RunStatus::MaxSteps
            };
        }
    };
    log.status = Some(status);
    info!(
        "{} after {} steps ({:.1} s)",
        status.name(),
        solver.steps(),
        start.elapsed().as_secs_f64()
    );
    Ok(RunOutcome {
        quantum_executions: solver.predictor().map_or(0, |q| q.executions()),
        state: solver.state().clone(),
        log,
        params,
        stencil: solver.stencil(),
        stencil_fallback: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::VectorField;

    #[test]
    fn derived_viscosities() {
        let mut c = RunConfig::new(Case::Cavity2d, Method::ClassicalFs, 16);
        c.length = LengthConvention::Nodes;
        assert!((derive_params(&c).unwrap().nu - 0.016).abs() < 1e-15);
        c.length = LengthConvention::Intervals;
        assert!((derive_params(&c).unwrap().nu - 0.015).abs() < 1e-15);
        let mut nc = RunConfig::new(Case::Nc2d, Method::ClassicalFs, 64);
        nc.length = LengthConvention::Nodes;
        let p = derive_params(&nc).unwrap();
        assert!((p.nu - 0.043_14).abs() < 5e-5, "{}", p.nu);
        assert!((p.kappa - p.nu / 0.71).abs() < 1e-15);
        let tg = derive_params(&RunConfig::new(Case::Tg2d, Method::ClassicalFs, 16)).unwrap();
        assert_eq!(tg.horizon, Some(1600));
        assert!((tg.nu - 0.005 * 8.0 / 10.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(Case::Tg2d, Method::QuantumFsII, 48);
        assert!(matches!(c.validate(), Err(Error::NotPowerOfTwo(48))));
        c.shape = vec![32, 32];
        c.validate().unwrap();
        c.epsilon = Some(1.5);
        assert!(c.validate().is_err());
        let mut nc = RunConfig::new(Case::Nc2d, Method::ClassicalFs, 16);
        nc.re = Some(100.0);
        assert!(nc.validate().is_err());
        let mut cav = RunConfig::new(Case::Cavity2d, Method::ClassicalFs, 16);
        cav.ra = Some(1e4);
        assert!(cav.validate().is_err());
        assert_eq!("QFS2".parse::<Method>().unwrap(), Method::QuantumFsII);
    }

    #[test]
    fn residual_examples() {
        let g = Grid::periodic(&[4, 4]).unwrap();
        let a = MacroState::new(
            ScalarField::constant(g, 1.0),
            VectorField::from_fn(g, |c| [0.01 * c[0] as f64, 0.02, 0.0]),
            Some(ScalarField::constant(g, 1.0)),
        )
        .unwrap();
        assert_eq!(residual(&a, &a, true).unwrap(), 0.0);
        let mut b = a.clone();
        for d in 0..2 {
            b.u.component_mut(d).iter_mut().for_each(|v| *v *= 2.0);
        }
        assert!((residual(&a, &b, false).unwrap() - 0.5).abs() < 1e-15);
        let mut t = a.clone();
        t.temperature.as_mut().unwrap().values_mut()[3] = 1.1;
        assert!(residual(&a, &t, true).unwrap() > 0.0);
        assert_eq!(residual(&a, &t, false).unwrap(), 0.0);
        let rest = MacroState::at_rest(g, None);
        assert_eq!(residual(&rest, &rest, false).unwrap(), f64::INFINITY);
    }

    #[test]
    fn tg_runs_fixed_horizon() {
        let c = RunConfig::new(Case::Tg2d, Method::ClassicalFs, 8);
        let out = run(&c).unwrap();
        assert_eq!(out.status(), RunStatus::Completed);
        assert_eq!(out.log.steps(), 800);
    }

    #[test]
    fn fs_with_intrinsic_viscosity_is_plain_collide_stream() {
        let mut c = RunConfig::new(Case::Tg2d, Method::ClassicalFs, 8);
        c.nu = Some(1.0 / 6.0);
        let mut s = Solver::new(&c, None).unwrap();
        let before = s.state().clone();
        s.step().unwrap();
        let f = collide_stream(&before, s.model(), FieldKind::Flow, EdfKind::Standard).unwrap();
        let (rho, m) = moments(&f, s.model());
        for k in 0..64 {
            assert_eq!(s.state().rho.values()[k], rho.values()[k]);
            assert!(
                (s.state().u.component(0)[k] - m.component(0)[k] / rho.values()[k]).abs() < 1e-17
            );
        }
    }

    #[test]
    fn periodic_runs_conserve_mass() {
        for method in [Method::ClassicalFs, Method::QuantumFsII] {
            let c = RunConfig::new(Case::Tg2d, method, 16);
            let mut s = Solver::new(&c, None).unwrap();
            let m0: f64 = s.state().rho.values().iter().sum();
            for _ in 0..10 {
                s.step().unwrap();
                let m: f64 = s.state().rho.values().iter().sum();
                assert!(((m - m0) / m0).abs() < 1e-12);
            }
        }
    }
}
