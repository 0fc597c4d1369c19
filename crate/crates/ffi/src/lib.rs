//! C ABI over the `qfslbm` solver.
//!
//! Configurations and solvers are opaque heap handles; release them with the
//! matching `*_free`. Every fallible call returns a [`QfsStatus`], and the
//! message of the last failure on the calling thread is available through
//! [`qfs_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qfslbm::io::parse_config;
use qfslbm::solver::{run, RunStatus, Solver};
use qfslbm::{Error, RunConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidInput = 4,
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Field selector for [`qfs_solver_copy_field`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfsField {
    Density = 0,
    VelocityX = 1,
    VelocityY = 2,
    VelocityZ = 3,
    Temperature = 4,
}

/// Terminal state of [`qfs_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfsRunStatus {
    Converged = 0,
    Completed = 1,
    MaxSteps = 2,
    Diverged = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfsRunResult {
    pub status: QfsRunStatus,
    pub steps: u64,
    /// Last logged residual (NaN if none).
    pub final_residual: f64,
    pub quantum_executions: u64,
}

/// Validated run configuration.
pub struct QfsConfig(RunConfig);

/// Solver advanced one step at a time.
pub struct QfsSolver(Solver);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> QfsStatus {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::NotPowerOfTwo(_) => QfsStatus::Config,
        Error::Io { .. } => QfsStatus::Io,
        Error::NonFinite(_)
        | Error::NonPositiveDensity { .. }
        | Error::LcuInfeasible { .. }
        | Error::ZeroNorm => QfsStatus::Numerical,
        _ => QfsStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (QfsStatus, String)>) -> QfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QfsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside qfslbm".into());
            QfsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (QfsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QfsStatus, String) {
    (QfsStatus::NullPointer, format!("{what} is null"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qfs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qfs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a flat `key = value` configuration.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qfs_config_parse(
    text: *const c_char,
    out: *mut *mut QfsConfig,
) -> QfsStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (QfsStatus::InvalidUtf8, e.to_string()))?;
        let c = parse_config(s, None).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(QfsConfig(c)));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from [`qfs_config_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qfs_config_free(config: *mut QfsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Builds a solver at step 0 from a configuration. The configuration stays
/// owned by the caller.
///
/// # Safety
/// `config` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qfs_solver_new(
    config: *const QfsConfig,
    out: *mut *mut QfsSolver,
) -> QfsStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = Solver::new(&c.0, None).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(QfsSolver(s)));
        Ok(())
    })
}

/// # Safety
/// `solver` must be null or a handle from [`qfs_solver_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qfs_solver_free(solver: *mut QfsSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Advances one time step. On success `residual` (if non-null) receives the
/// step residual. On a numerical failure the solver keeps its previous state.
///
/// # Safety
/// `solver` must be a live handle; `residual` null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qfs_solver_step(solver: *mut QfsSolver, residual: *mut f64) -> QfsStatus {
    guard(|| {
        let s = solver.as_mut().ok_or_else(|| null("solver"))?;
        let r = s.0.step().map_err(lib_err)?;
        if !residual.is_null() {
            *residual = r;
        }
        Ok(())
    })
}

/// Steps taken so far (0 for a null handle).
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qfs_solver_steps(solver: *const QfsSolver) -> u64 {
    solver.as_ref().map_or(0, |s| s.0.steps() as u64)
}

/// Quantum circuits executed so far (0 for classical methods).
///
/// # Safety
/// `solver` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qfs_solver_circuit_executions(solver: *const QfsSolver) -> u64 {
    solver
        .as_ref()
        .and_then(|s| s.0.predictor())
        .map_or(0, |p| p.executions())
}

/// Writes the grid extents to `shape[0..3]` (1 for the unused z axis of 2D
/// grids) and returns the node count.
///
/// # Safety
/// `solver` must be a live handle; `shape` null or valid for 3 writes.
#[no_mangle]
pub unsafe extern "C" fn qfs_solver_shape(solver: *const QfsSolver, shape: *mut usize) -> usize {
    let Some(s) = solver.as_ref() else { return 0 };
    let grid = s.0.grid();
    if !shape.is_null() {
        for (i, m) in grid.shape().iter().enumerate() {
            *shape.add(i) = *m;
        }
    }
    grid.node_count()
}

/// Copies one field in node order (x fastest) into `buf`, which must hold
/// the node count.
///
/// # Safety
/// `solver` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qfs_solver_copy_field(
    solver: *const QfsSolver,
    field: QfsField,
    buf: *mut f64,
    len: usize,
) -> QfsStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let state = s.0.state();
        let dims = state.grid().dims();
        let values: &[f64] = match field {
            QfsField::Density => state.rho.values(),
            QfsField::VelocityX => state.u.component(0),
            QfsField::VelocityY => state.u.component(1),
            QfsField::VelocityZ if dims == 3 => state.u.component(2),
            QfsField::VelocityZ => {
                return Err((QfsStatus::InvalidInput, "2D grid has no z velocity".into()))
            }
            QfsField::Temperature => match &state.temperature {
                Some(t) => t.values(),
                None => {
                    return Err((
                        QfsStatus::InvalidInput,
                        "isothermal run has no temperature".into(),
                    ))
                }
            },
        };
        if len < values.len() {
            return Err((
                QfsStatus::BufferTooSmall,
                format!("buffer holds {len} values, field has {}", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Runs a configuration to completion (without writing output files).
///
/// # Safety
/// `config` must be a live handle; `result` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn qfs_run(config: *const QfsConfig, result: *mut QfsRunResult) -> QfsStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        if result.is_null() {
            return Err(null("result"));
        }
        let mut cfg = c.0.clone();
        cfg.out_dir = None;
        let out = run(&cfg).map_err(lib_err)?;
        *result = QfsRunResult {
            status: match out.status() {
                RunStatus::Converged => QfsRunStatus::Converged,
                RunStatus::Completed => QfsRunStatus::Completed,
                RunStatus::MaxSteps => QfsRunStatus::MaxSteps,
                RunStatus::Diverged => QfsRunStatus::Diverged,
            },
            steps: out.log.steps() as u64,
            final_residual: out.log.last_residual().unwrap_or(f64::NAN),
            quantum_executions: out.quantum_executions,
        };
        Ok(())
    })
}
