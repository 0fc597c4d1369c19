//! Configuration files, field snapshots (CSV, legacy VTK), convergence logs and
//! run summaries.
//!
//! Every writer formats floats with Rust's shortest round-trip representation,
//! so the matching reader recovers the exact doubles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    centerline_extract, convection_metrics, l2_error, l2_error_all, taylor_green_exact, Case,
    Centerline, ReferenceProfile,
};
use crate::error::{Error, Result};
use crate::kernels::{Grid, MacroState, ScalarField, Stencil, Topology, VectorField, LATTICE_CS2};
use crate::solver::{run_with, LengthConvention, Method, RunConfig, RunOutcome, StepRecord};

const CONFIG_KEYS: &[&str] = &[
    "case",
    "method",
    "n",
    "shape",
    "re",
    "ra",
    "pr",
    "g_beta",
    "u_ref",
    "stencil",
    "epsilon",
    "max_steps",
    "t_star",
    "length",
    "nu",
    "kappa",
    "initial",
    "out",
    "snapshot_every",
    "log_every",
    "vtk",
];

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
}

pub fn parse_stencil(s: &str) -> Result<Option<Stencil>> {
    match s.to_ascii_lowercase().as_str() {
        "cd" => Ok(Some(Stencil::Cd)),
        "ss" => Ok(Some(Stencil::Ss)),
        "auto" => Ok(None),
        _ => Err(Error::Config(format!(
            "unknown stencil {s:?} (expected cd, ss or auto)"
        ))),
    }
}

pub fn stencil_name(s: Option<Stencil>) -> &'static str {
    match s {
        Some(Stencil::Cd) => "cd",
        Some(Stencil::Ss) => "ss",
        None => "auto",
    }
}

/// Parses `16x16` or `8x8x8`.
pub fn parse_shape(s: &str) -> Result<Vec<usize>> {
    s.split('x')
        .map(|p| parse_value::<usize>("shape", p.trim()))
        .collect()
}

pub fn format_shape(shape: &[usize]) -> String {
    shape
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

/// Parses a flat `key = value` configuration. `#` starts a comment; `base`
/// resolves a relative `initial` path.
///
/// `case` is required; everything else falls back to [`RunConfig::new`].
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim().to_ascii_lowercase();
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key {k:?}", i + 1)));
        }
        if map.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key {k:?}",
                i + 1
            )));
        }
    }
    let case: Case = map
        .get("case")
        .ok_or_else(|| Error::Config("missing key \"case\"".into()))?
        .parse()?;
    let method: Method = map
        .get("method")
        .map_or(Ok(Method::ClassicalFs), |m| m.parse())?;
    let mut c = RunConfig::new(case, method, 32);
    if let Some(n) = map.get("n") {
        let n: usize = parse_value("n", n)?;
        c.shape = vec![n; c.shape.len()];
    }
    if let Some(s) = map.get("shape") {
        if map.contains_key("n") {
            return Err(Error::Config("give either n or shape, not both".into()));
        }
        c.shape = parse_shape(s)?;
    }
    // Supplying the other similarity number replaces the case default.
    if let Some(v) = map.get("re") {
        c.re = Some(parse_value("re", v)?);
        if !map.contains_key("ra") && !case.is_thermal() {
            c.ra = None;
        }
    }
    if let Some(v) = map.get("ra") {
        c.ra = Some(parse_value("ra", v)?);
    }
    if case == Case::Custom || (map.contains_key("nu") && !map.contains_key("re")) {
        c.re = None;
    }
    for (key, slot) in [
        ("pr", &mut c.pr),
        ("g_beta", &mut c.g_beta),
        ("u_ref", &mut c.u_ref),
        ("t_star", &mut c.t_star),
    ] {
        if let Some(v) = map.get(key) {
            *slot = parse_value(key, v)?;
        }
    }
    if let Some(v) = map.get("stencil") {
        c.stencil = parse_stencil(v)?;
    }
    if let Some(v) = map.get("epsilon") {
        c.epsilon = Some(parse_value("epsilon", v)?);
    }
    for (key, slot) in [
        ("max_steps", &mut c.max_steps),
        ("snapshot_every", &mut c.snapshot_every),
        ("log_every", &mut c.log_every),
    ] {
        if let Some(v) = map.get(key) {
            *slot = parse_value(key, v)?;
        }
    }
    if let Some(v) = map.get("length") {
        c.length = v.parse()?;
    }
    if let Some(v) = map.get("nu") {
        c.nu = Some(parse_value("nu", v)?);
    }
    if let Some(v) = map.get("kappa") {
        c.kappa = Some(parse_value("kappa", v)?);
    }
    if let Some(v) = map.get("initial") {
        let p = PathBuf::from(v);
        c.initial = Some(match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        });
    }
    if let Some(v) = map.get("out") {
        c.out_dir = Some(PathBuf::from(v));
    }
    if let Some(v) = map.get("vtk") {
        c.vtk = parse_value("vtk", v)?;
    }
    c.validate()?;
    Ok(c)
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path.parent())
}

/// Renders a configuration with every default spelled out. Parsing the result
/// gives back the same [`RunConfig`].
pub fn config_to_text(c: &RunConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        writeln!(s, "{k} = {v}").expect("writing to a String");
    };
    kv("case", c.case.to_string());
    kv("method", c.method.to_string());
    kv("shape", format_shape(&c.shape));
    if let Some(re) = c.re {
        kv("re", format!("{re:?}"));
    }
    if let Some(ra) = c.ra {
        kv("ra", format!("{ra:?}"));
    }
    kv("pr", format!("{:?}", c.pr));
    kv("g_beta", format!("{:?}", c.g_beta));
    kv("u_ref", format!("{:?}", c.u_ref));
    kv("stencil", stencil_name(c.stencil).to_string());
    if let Some(e) = c.epsilon {
        kv("epsilon", format!("{e:?}"));
    }
    kv("max_steps", c.max_steps.to_string());
    kv("t_star", format!("{:?}", c.t_star));
    kv("length", c.length.name().to_string());
    if let Some(nu) = c.nu {
        kv("nu", format!("{nu:?}"));
    }
    if let Some(k) = c.kappa {
        kv("kappa", format!("{k:?}"));
    }
    if let Some(p) = &c.initial {
        kv("initial", p.display().to_string());
    }
    if let Some(p) = &c.out_dir {
        kv("out", p.display().to_string());
    }
    kv("snapshot_every", c.snapshot_every.to_string());
    kv("log_every", c.log_every.to_string());
    kv("vtk", c.vtk.to_string());
    s
}

fn topology_name(t: Topology) -> &'static str {
    match t {
        Topology::Periodic => "periodic",
        Topology::Walled => "walled",
    }
}

fn grid_header(grid: &Grid) -> String {
    let dims = grid.dims();
    let shape: Vec<usize> = (0..dims).map(|a| grid.extent(a)).collect();
    let topo: Vec<&str> = (0..dims).map(|a| topology_name(grid.topology(a))).collect();
    format!(
        "# grid {} {} {:?} {:?}",
        format_shape(&shape),
        topo.join(","),
        grid.dx(),
        grid.dt()
    )
}

fn parse_grid_header(line: &str) -> Result<Grid> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let [_, "grid", shape, topo, dx, dt] = toks.as_slice() else {
        return Err(Error::Parse(format!("bad grid header {line:?}")));
    };
    let shape = parse_shape(shape)?;
    let topo = topo
        .split(',')
        .map(|t| match t {
            "periodic" => Ok(Topology::Periodic),
            "walled" => Ok(Topology::Walled),
            _ => Err(Error::Parse(format!("unknown topology {t:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad spacing {t:?}")))
    };
    Grid::new(&shape, &topo)?.with_spacing(num(dx)?, num(dt)?)
}

/// CSV snapshot: a `# grid` comment line, then columns
/// `x,y[,z],rho,u,v[,w][,T]` in node order (x fastest).
pub fn snapshot_csv(state: &MacroState) -> String {
    let grid = state.grid();
    let dims = grid.dims();
    let mut s = grid_header(grid);
    s.push('\n');
    let axes = ["x", "y", "z"];
    let vel = ["u", "v", "w"];
    let mut cols: Vec<&str> = axes[..dims].to_vec();
    cols.push("rho");
    cols.extend_from_slice(&vel[..dims]);
    if state.is_thermal() {
        cols.push("T");
    }
    s.push_str(&cols.join(","));
    s.push('\n');
    for k in 0..grid.node_count() {
        let c = grid.coords(k);
        for &ci in &c[..dims] {
            write!(s, "{ci},").expect("writing to a String");
        }
        write!(s, "{:?}", state.rho.values()[k]).expect("writing to a String");
        for d in 0..dims {
            write!(s, ",{:?}", state.u.component(d)[k]).expect("writing to a String");
        }
        if let Some(t) = &state.temperature {
            write!(s, ",{:?}", t.values()[k]).expect("writing to a String");
        }
        s.push('\n');
    }
    s
}

pub fn parse_snapshot_csv(text: &str) -> Result<MacroState> {
    let mut lines = text.lines();
    let grid = parse_grid_header(
        lines
            .next()
            .ok_or_else(|| Error::Parse("empty snapshot".into()))?,
    )?;
    let dims = grid.dims();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("snapshot lacks a column header".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let thermal = match cols.len() - (2 * dims + 1) {
        0 => false,
        1 if cols.last() == Some(&"T") => true,
        _ => return Err(Error::Parse(format!("unexpected columns {header:?}"))),
    };
    let n = grid.node_count();
    let mut rho = Vec::with_capacity(n);
    let mut u = vec![Vec::with_capacity(n); dims];
    let mut t = Vec::new();
    for (k, line) in lines.enumerate() {
        if k >= n {
            return Err(Error::Parse(format!("snapshot has more than {n} rows")));
        }
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != cols.len() {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                k + 1,
                vals.len(),
                cols.len()
            )));
        }
        let expected = grid.coords(k);
        for d in 0..dims {
            if vals[d].parse::<usize>().ok() != Some(expected[d]) {
                return Err(Error::Parse(format!("row {} is out of node order", k + 1)));
            }
        }
        let num = |i: usize| -> Result<f64> {
            vals[i]
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad number {:?}", k + 1, vals[i])))
        };
        rho.push(num(dims)?);
        for (d, comp) in u.iter_mut().enumerate() {
            comp.push(num(dims + 1 + d)?);
        }
        if thermal {
            t.push(num(2 * dims + 1)?);
        }
    }
    if rho.len() != n {
        return Err(Error::Parse(format!(
            "snapshot has {} rows, expected {n}",
            rho.len()
        )));
    }
    MacroState::new(
        ScalarField::new(grid, rho)?,
        VectorField::new(grid, u)?,
        thermal.then(|| ScalarField::new(grid, t)).transpose()?,
    )
}

pub fn write_snapshot_csv(state: &MacroState, path: &Path) -> Result<()> {
    fs::write(path, snapshot_csv(state)).map_err(|e| Error::io(path, e))
}

/// Reads a CSV snapshot, checking the grid against `shape` when given.
pub fn read_snapshot_csv(path: &Path, shape: Option<&[usize]>) -> Result<MacroState> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let state = parse_snapshot_csv(&text)?;
    if let Some(shape) = shape {
        let g = state.grid();
        let got: Vec<usize> = (0..g.dims()).map(|a| g.extent(a)).collect();
        if got != shape {
            return Err(Error::GridMismatch(format!(
                "snapshot {} is {got:?}, expected {shape:?}",
                path.display()
            )));
        }
    }
    Ok(state)
}

/// Legacy-VTK ASCII structured points with `rho`, `velocity` and optional `T`.
/// The `# grid` line is kept as the VTK title so topology survives a round trip.
pub fn snapshot_vtk(state: &MacroState) -> String {
    let grid = state.grid();
    let [mx, my, mz] = grid.shape();
    let n = grid.node_count();
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "# vtk DataFile Version 3.0").unwrap();
    writeln!(w, "{}", grid_header(grid)).unwrap();
    writeln!(w, "ASCII\nDATASET STRUCTURED_POINTS").unwrap();
    writeln!(w, "DIMENSIONS {mx} {my} {mz}").unwrap();
    writeln!(w, "ORIGIN 0 0 0").unwrap();
    writeln!(w, "SPACING {:?} {:?} {:?}", grid.dx(), grid.dx(), grid.dx()).unwrap();
    writeln!(w, "POINT_DATA {n}").unwrap();
    writeln!(w, "SCALARS rho double 1\nLOOKUP_TABLE default").unwrap();
    for v in state.rho.values() {
        writeln!(w, "{v:?}").unwrap();
    }
    writeln!(w, "VECTORS velocity double").unwrap();
    for k in 0..n {
        let u = state.u.at(k);
        writeln!(w, "{:?} {:?} {:?}", u[0], u[1], u[2]).unwrap();
    }
    if let Some(t) = &state.temperature {
        writeln!(w, "SCALARS T double 1\nLOOKUP_TABLE default").unwrap();
        for v in t.values() {
            writeln!(w, "{v:?}").unwrap();
        }
    }
    s
}

pub fn parse_snapshot_vtk(text: &str) -> Result<MacroState> {
    let mut lines = text.lines();
    let bad = |m: &str| Error::Parse(format!("vtk: {m}"));
    lines
        .next()
        .filter(|l| l.starts_with("# vtk"))
        .ok_or_else(|| bad("missing version line"))?;
    let grid = parse_grid_header(lines.next().ok_or_else(|| bad("missing title"))?)?;
    let n = grid.node_count();
    let dims = grid.dims();
    let mut rho = None;
    let mut u = None;
    let mut t = None;
    let mut lines = lines.peekable();
    while let Some(line) = lines.next() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["SCALARS", name, ..] => {
                lines
                    .next()
                    .filter(|l| l.starts_with("LOOKUP_TABLE"))
                    .ok_or_else(|| bad("missing LOOKUP_TABLE"))?;
                let vals = (0..n)
                    .map(|_| {
                        lines
                            .next()
                            .and_then(|l| l.trim().parse::<f64>().ok())
                            .ok_or_else(|| bad("short scalar block"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                match *name {
                    "rho" => rho = Some(vals),
                    "T" => t = Some(vals),
                    other => return Err(bad(&format!("unknown scalar {other}"))),
                }
            }
            ["VECTORS", ..] => {
                let mut comps = vec![Vec::with_capacity(n); dims];
                for _ in 0..n {
                    let l = lines.next().ok_or_else(|| bad("short vector block"))?;
                    let v = l
                        .split_whitespace()
                        .map(|x| x.parse::<f64>().map_err(|_| bad("bad vector entry")))
                        .collect::<Result<Vec<_>>>()?;
                    if v.len() != 3 {
                        return Err(bad("vector rows need three entries"));
                    }
                    for (d, c) in comps.iter_mut().enumerate() {
                        c.push(v[d]);
                    }
                }
                u = Some(comps);
            }
            _ => {}
        }
    }
    let rho = rho.ok_or_else(|| bad("no rho block"))?;
    let u = u.ok_or_else(|| bad("no velocity block"))?;
    MacroState::new(
        ScalarField::new(grid, rho)?,
        VectorField::new(grid, u)?,
        t.map(|t| ScalarField::new(grid, t)).transpose()?,
    )
}

pub fn write_snapshot_vtk(state: &MacroState, path: &Path) -> Result<()> {
    fs::write(path, snapshot_vtk(state)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot_vtk(path: &Path) -> Result<MacroState> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot_vtk(&text)
}

/// Convergence CSV (`step,residual[,nusselt]`), flushed after every row.
pub struct ConvergenceWriter {
    out: BufWriter<File>,
    path: PathBuf,
    thermal: bool,
}

impl ConvergenceWriter {
    /// Truncates `path` and writes the header.
    pub fn create(path: &Path, thermal: bool) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = ConvergenceWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
            thermal,
        };
        let header = if thermal {
            "step,residual,nusselt"
        } else {
            "step,residual"
        };
        w.line(header)?;
        Ok(w)
    }

    /// Appends to an existing log, writing the header only if the file is new.
    pub fn append(path: &Path, thermal: bool) -> Result<Self> {
        if !path.exists() || fs::metadata(path).map_err(|e| Error::io(path, e))?.len() == 0 {
            return Self::create(path, thermal);
        }
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(ConvergenceWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
            thermal,
        })
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn record(&mut self, r: &StepRecord) -> Result<()> {
        let mut s = format!("{},{:?}", r.step, r.residual);
        if self.thermal {
            write!(s, ",{:?}", r.nusselt.unwrap_or(f64::NAN)).expect("writing to a String");
        }
        self.line(&s)
    }
}

/// Reads `(step, residual, nusselt)` rows back from a convergence CSV.
pub fn read_convergence_csv(path: &Path) -> Result<Vec<(usize, f64, Option<f64>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let v: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse(format!("{} line {}: {line:?}", path.display(), i + 1));
        let step = v.first().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let res = v.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let nu = match v.get(2) {
            Some(s) => Some(s.parse().map_err(|_| bad())?),
            None => None,
        };
        rows.push((step, res, nu));
    }
    Ok(rows)
}

/// Machine-readable record of a finished run. Carries the full configuration,
/// so the run can be repeated from this file alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: Method,
    pub case: Case,
    pub shape: Vec<usize>,
    pub nu: f64,
    pub kappa: f64,
    pub length: f64,
    pub length_convention: LengthConvention,
    pub stencil: Stencil,
    pub stencil_fallback: bool,
    pub status: crate::solver::RunStatus,
    pub steps: usize,
    pub final_residual: Option<f64>,
    pub reason: Option<String>,
    pub quantum_executions: u64,
    pub metrics: BTreeMap<String, f64>,
    pub config: RunConfig,
}

impl RunSummary {
    pub fn new(config: &RunConfig, outcome: &RunOutcome, metrics: BTreeMap<String, f64>) -> Self {
        RunSummary {
            method: config.method,
            case: config.case,
            shape: config.shape.clone(),
            nu: outcome.params.nu,
            kappa: outcome.params.kappa,
            length: outcome.params.length,
            length_convention: config.length,
            stencil: outcome.stencil,
            stencil_fallback: outcome.stencil_fallback,
            status: outcome.status(),
            steps: outcome.log.steps(),
            final_residual: outcome.log.last_residual().filter(|r| r.is_finite()),
            reason: outcome.log.reason.clone(),
            quantum_executions: outcome.quantum_executions,
            metrics,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(format!("summary: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("summary: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Names of files in an output directory.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub dir: PathBuf,
}

impl OutputBundle {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(OutputBundle {
            dir: dir.to_path_buf(),
        })
    }

    pub fn convergence(&self) -> PathBuf {
        self.dir.join("convergence.csv")
    }

    pub fn summary(&self) -> PathBuf {
        self.dir.join("summary.json")
    }

    pub fn config_echo(&self) -> PathBuf {
        self.dir.join("config.txt")
    }

    pub fn snapshot(&self, step: Option<usize>, ext: &str) -> PathBuf {
        match step {
            Some(s) => self.dir.join(format!("field_{s:08}.{ext}")),
            None => self.dir.join(format!("field_final.{ext}")),
        }
    }

    pub fn write_snapshot(&self, state: &MacroState, step: Option<usize>, vtk: bool) -> Result<()> {
        write_snapshot_csv(state, &self.snapshot(step, "csv"))?;
        if vtk {
            write_snapshot_vtk(state, &self.snapshot(step, "vtk"))?;
        }
        Ok(())
    }
}

/// Case-specific scalar results of a finished run.
///
/// Taylor-Green: L2 errors against the exact decay. Natural convection: mean
/// Nusselt number and centerline velocity extrema scaled by `H / kappa`.
/// Cavity: centerline velocity extrema scaled by the lid speed.
pub fn headline_metrics(config: &RunConfig, outcome: &RunOutcome) -> Result<BTreeMap<String, f64>> {
    let mut m = BTreeMap::new();
    let state = &outcome.state;
    let p = &outcome.params;
    match config.case {
        Case::Tg2d | Case::Tg3d => {
            let grid = state.grid();
            let t = outcome.log.steps() as f64 * grid.dt();
            let re = config.u_ref.abs() * p.length / p.nu;
            let exact = taylor_green_exact(grid, t, config.u_ref, p.length, re, 1.0, LATTICE_CS2)?;
            m.insert("l2_error".into(), l2_error(state, &exact, config.u_ref)?);
            m.insert(
                "l2_error_all".into(),
                l2_error_all(state, &exact, config.u_ref)?,
            );
        }
        Case::Nc2d | Case::Nc3d => {
            let c = convection_metrics(state, p.kappa, p.length)?;
            m.insert("nusselt".into(), c.nusselt);
            m.insert("u_max".into(), c.u_max);
            m.insert("y_at_u_max".into(), c.y_at_u_max);
            m.insert("v_max".into(), c.v_max);
            m.insert("x_at_v_max".into(), c.x_at_v_max);
        }
        Case::Cavity2d | Case::Cavity3d => {
            let scale = 1.0 / config.u_ref;
            let u = centerline_extract(state, Centerline::UAlongY, scale)?;
            let v = centerline_extract(state, Centerline::VAlongX, scale)?;
            let min = |p: &ReferenceProfile| p.values.iter().copied().fold(f64::INFINITY, f64::min);
            m.insert("u_min".into(), min(&u));
            m.insert("v_max".into(), v.max().0);
            m.insert("v_min".into(), min(&v));
        }
        Case::Custom => {}
    }
    Ok(m)
}

/// Runs `config`, writing the output bundle when `out_dir` is set: config echo,
/// convergence CSV, snapshots per cadence, final snapshot and summary.
pub fn execute(config: &RunConfig) -> Result<(RunOutcome, RunSummary)> {
    let bundle = config
        .out_dir
        .as_deref()
        .map(OutputBundle::create)
        .transpose()?;
    let mut log = None;
    if let Some(b) = &bundle {
        fs::write(b.config_echo(), config_to_text(config))
            .map_err(|e| Error::io(b.config_echo(), e))?;
        log = Some(ConvergenceWriter::create(
            &b.convergence(),
            config.case.is_thermal(),
        )?);
    }
    let mut seen_stencil = None;
    let outcome = run_with(config, |solver, rec| {
        if let (Some(b), Some(w)) = (&bundle, log.as_mut()) {
            // An SS fallback restarts from step 1, so the log restarts too.
            if seen_stencil.is_some_and(|s| s != solver.stencil()) {
                *w = ConvergenceWriter::create(&b.convergence(), config.case.is_thermal())?;
            }
            seen_stencil = Some(solver.stencil());
            w.record(rec)?;
            if config.snapshot_every > 0 && rec.step % config.snapshot_every == 0 {
                b.write_snapshot(solver.state(), Some(rec.step), config.vtk)?;
            }
        }
        Ok(())
    })?;
    let summary = RunSummary::new(config, &outcome, headline_metrics(config, &outcome)?);
    if let Some(b) = &bundle {
        b.write_snapshot(&outcome.state, None, config.vtk)?;
        summary.write(&b.summary())?;
    }
    Ok((outcome, summary))
}

/// Keys accepted by [`parse_config`].
pub fn config_keys() -> BTreeSet<&'static str> {
    CONFIG_KEYS.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_errors() {
        let c = parse_config("case = tg2d\nmethod = qfs2\nn = 32\n", None).unwrap();
        assert_eq!(c.shape, vec![32, 32]);
        assert_eq!(c.re, Some(10.0));
        assert!(matches!(
            parse_config("case = tg2d\nmethod = qfs2\nn = 48", None),
            Err(Error::NotPowerOfTwo(48))
        ));
        assert!(parse_config("case = tg2d\nfoo = 1", None).is_err());
        assert!(parse_config("case = nc2d\nre = 10", None).is_err());
        let nc = parse_config("case = nc2d\nra = 1e4\nn = 64", None).unwrap();
        assert_eq!((nc.pr, nc.g_beta, nc.ra), (0.71, 1e-5, Some(1e4)));
    }

    #[test]
    fn config_echo_round_trips() {
        let mut c = RunConfig::new(Case::Nc3d, Method::QuantumLksI, 16);
        c.stencil = Some(Stencil::Ss);
        c.epsilon = Some(3e-8);
        c.out_dir = Some("out/x".into());
        assert_eq!(parse_config(&config_to_text(&c), None).unwrap(), c);
    }

    #[test]
    fn snapshot_round_trip() {
        let g = Grid::new(&[4, 5], &[Topology::Periodic, Topology::Walled]).unwrap();
        let s = MacroState::new(
            ScalarField::from_fn(g, |c| 1.0 + 0.1 / (1.0 + c[0] as f64)),
            VectorField::from_fn(g, |c| [1.0 / 3.0 * c[1] as f64 * 1e-3, -1e-300, 0.0]),
            Some(ScalarField::from_fn(g, |c| {
                1.0 + (c[0] * c[1]) as f64 / 7.0
            })),
        )
        .unwrap();
        assert_eq!(parse_snapshot_csv(&snapshot_csv(&s)).unwrap(), s);
        assert_eq!(parse_snapshot_vtk(&snapshot_vtk(&s)).unwrap(), s);
    }
}
