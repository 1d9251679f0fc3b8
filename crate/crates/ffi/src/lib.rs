//! C ABI over the kfbi solver.
//!
//! Every entry point returns a [`KfbiStatus`]; on failure the message is
//! kept per thread and can be read with [`kfbi_last_error_message`].
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use kfbi::harness::{preset, run_single, ExperimentConfig};
use kfbi::KfbiError;

/// Status codes shared by all entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KfbiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidProblem = 4,
    Geometry = 5,
    NotConverged = 6,
    ShapeMismatch = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

impl From<&KfbiError> for KfbiStatus {
    fn from(e: &KfbiError) -> Self {
        use KfbiError::*;
        match e {
            Config(_) | InvalidGrid(_) => KfbiStatus::Config,
            InvalidProblem(_) | SingularOperator(_) => KfbiStatus::InvalidProblem,
            DegenerateParameterization { .. }
            | IndefiniteCoefficients { .. }
            | CurveTooSmall { .. }
            | DegenerateCurve(_)
            | InterfaceTooCloseToBoundary { .. }
            | RankDeficient { .. }
            | MissingPatch { .. }
            | InsufficientNodes { .. } => KfbiStatus::Geometry,
            MultigridNotConverged { .. } | GmresNotConverged { .. } => KfbiStatus::NotConverged,
            ShapeMismatch { .. } => KfbiStatus::ShapeMismatch,
            Io(_) => KfbiStatus::Io,
        }
    }
}

/// A validated experiment configuration.
pub struct KfbiExperiment {
    config: ExperimentConfig,
}

/// Result of solving one grid level.
pub struct KfbiSolution {
    nx: usize,
    ny: usize,
    interface_points: usize,
    values: Vec<f64>,
    exact: Vec<f64>,
    max_error: f64,
    gmres_iterations: usize,
    cpu_seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: KfbiStatus, msg: impl Into<String>) -> KfbiStatus {
    set_error(msg.into());
    status
}

fn from_error(e: KfbiError) -> KfbiStatus {
    fail(KfbiStatus::from(&e), format!("{}: {e}", e.kind()))
}

fn guarded(f: impl FnOnce() -> KfbiStatus) -> KfbiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(KfbiStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, KfbiStatus> {
    if s.is_null() {
        return Err(fail(KfbiStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        fail(
            KfbiStatus::InvalidUtf8,
            "string argument is not valid UTF-8",
        )
    })
}

unsafe fn store_experiment(config: ExperimentConfig, out: *mut *mut KfbiExperiment) -> KfbiStatus {
    *out = Box::into_raw(Box::new(KfbiExperiment { config }));
    KfbiStatus::Ok
}

/// Parses a TOML experiment description.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kfbi_experiment_from_toml(
    toml: *const c_char,
    out: *mut *mut KfbiExperiment,
) -> KfbiStatus {
    guarded(|| {
        if out.is_null() {
            return fail(KfbiStatus::NullPointer, "null output handle");
        }
        let text = match read_str(toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ExperimentConfig::from_toml(text) {
            Ok(cfg) => store_experiment(cfg, out),
            Err(e) => from_error(e),
        }
    })
}

/// Looks up a built-in preset by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kfbi_experiment_from_preset(
    name: *const c_char,
    out: *mut *mut KfbiExperiment,
) -> KfbiStatus {
    guarded(|| {
        if out.is_null() {
            return fail(KfbiStatus::NullPointer, "null output handle");
        }
        let name = match read_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match preset(name) {
            Some(p) => store_experiment(p.config, out),
            None => fail(
                KfbiStatus::Config,
                format!("config: unknown preset {name:?}"),
            ),
        }
    })
}

/// # Safety
/// `exp` must come from a `kfbi_experiment_from_*` call, or be null.
#[no_mangle]
pub unsafe extern "C" fn kfbi_experiment_free(exp: *mut KfbiExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Solves the experiment on an `n × n` grid with manufactured data.
///
/// # Safety
/// `exp` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kfbi_experiment_solve(
    exp: *const KfbiExperiment,
    n: usize,
    out: *mut *mut KfbiSolution,
) -> KfbiStatus {
    guarded(|| {
        if exp.is_null() || out.is_null() {
            return fail(KfbiStatus::NullPointer, "null handle");
        }
        match run_single(&(*exp).config, n) {
            Ok(o) => {
                let grid = o.solution.u.grid;
                *out = Box::into_raw(Box::new(KfbiSolution {
                    nx: grid.nx(),
                    ny: grid.ny(),
                    interface_points: o.m,
                    values: o.solution.u.values,
                    exact: o.exact,
                    max_error: o.max_error,
                    gmres_iterations: o.solution.stats.gmres_iterations,
                    cpu_seconds: o.cpu_seconds,
                }));
                KfbiStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `sol` must come from [`kfbi_experiment_solve`], or be null.
#[no_mangle]
pub unsafe extern "C" fn kfbi_solution_free(sol: *mut KfbiSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Node counts along the two parameter directions; values are stored
/// with the first direction fastest.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kfbi_solution_shape(
    sol: *const KfbiSolution,
    nx: *mut usize,
    ny: *mut usize,
) -> KfbiStatus {
    if sol.is_null() || nx.is_null() || ny.is_null() {
        return fail(KfbiStatus::NullPointer, "null argument");
    }
    *nx = (*sol).nx;
    *ny = (*sol).ny;
    KfbiStatus::Ok
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> KfbiStatus {
    if dst.is_null() {
        return fail(KfbiStatus::NullPointer, "null buffer");
    }
    if len < src.len() {
        return fail(
            KfbiStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        );
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    KfbiStatus::Ok
}

/// Copies the computed nodal solution into `buf` (`nx·ny` doubles).
///
/// # Safety
/// `sol` must be live and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kfbi_solution_values(
    sol: *const KfbiSolution,
    buf: *mut f64,
    len: usize,
) -> KfbiStatus {
    if sol.is_null() {
        return fail(KfbiStatus::NullPointer, "null handle");
    }
    copy_out(&(*sol).values, buf, len)
}

/// Copies the exact solution sampled at the nodes into `buf`.
///
/// # Safety
/// As [`kfbi_solution_values`].
#[no_mangle]
pub unsafe extern "C" fn kfbi_solution_exact(
    sol: *const KfbiSolution,
    buf: *mut f64,
    len: usize,
) -> KfbiStatus {
    if sol.is_null() {
        return fail(KfbiStatus::NullPointer, "null handle");
    }
    copy_out(&(*sol).exact, buf, len)
}

/// Max-norm error over the measured nodes, NaN for a null handle.
///
/// # Safety
/// `sol` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn kfbi_solution_max_error(sol: *const KfbiSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.max_error)
}

/// # Safety
/// `sol` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn kfbi_solution_gmres_iterations(sol: *const KfbiSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.gmres_iterations)
}

/// # Safety
/// `sol` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn kfbi_solution_interface_points(sol: *const KfbiSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.interface_points)
}

/// # Safety
/// `sol` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn kfbi_solution_cpu_seconds(sol: *const KfbiSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.cpu_seconds)
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must hold `len` bytes, or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn kfbi_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Static NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn kfbi_status_name(status: KfbiStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        KfbiStatus::Ok => b"ok\0",
        KfbiStatus::NullPointer => b"null_pointer\0",
        KfbiStatus::InvalidUtf8 => b"invalid_utf8\0",
        KfbiStatus::Config => b"config\0",
        KfbiStatus::InvalidProblem => b"invalid_problem\0",
        KfbiStatus::Geometry => b"geometry\0",
        KfbiStatus::NotConverged => b"not_converged\0",
        KfbiStatus::ShapeMismatch => b"shape_mismatch\0",
        KfbiStatus::Io => b"io\0",
        KfbiStatus::BufferTooSmall => b"buffer_too_small\0",
        KfbiStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}
