//! C interface to `fode-core`.
//!
//! Every function returns a [`FodeStatus`] (or a plain value for the cheap
//! accessors). On failure the message is kept per thread and can be read
//! with [`fode_last_error_message`]. Handles are opaque and owned by the
//! caller: free them with the matching `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use fode_core::harness::csv::write_trajectory;
use fode_core::{FodeError, FractionalProblem, GridSpec, NamedSystem, Rhs, Strategy, Trajectory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FodeStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    Index = 4,
    Step = 5,
    Strategy = 6,
    DegenerateData = 7,
    OutOfRange = 8,
    Io = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FodeStrategyKind {
    Serial = 0,
    Block = 1,
    Reduction = 2,
}

/// Right-hand side callback: write `f(t, y)` into `dy`, both of length `dim`.
/// Called concurrently from worker threads by the parallel strategies.
pub type FodeRhsFn = Option<unsafe extern "C" fn(user_data: *mut c_void, t: f64, y: *const f64, dy: *mut f64, dim: usize)>;

pub struct FodeProblem(FractionalProblem);

pub struct FodeTrajectory {
    traj: Trajectory,
    times: Vec<f64>,
}

struct LastError {
    message: String,
    step: Option<usize>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(status: FodeStatus, message: String, step: Option<usize>) -> FodeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(LastError { message, step }));
    status
}

fn status_of(e: &FodeError) -> FodeStatus {
    match e {
        FodeError::Domain(_) => FodeStatus::Domain,
        FodeError::Config(_) => FodeStatus::Config,
        FodeError::Index { .. } => FodeStatus::Index,
        FodeError::Step { .. } => FodeStatus::Step,
        FodeError::Strategy(_) => FodeStatus::Strategy,
        FodeError::DegenerateData(_) => FodeStatus::DegenerateData,
        FodeError::OutOfRange(_) => FodeStatus::OutOfRange,
        FodeError::Io(_) => FodeStatus::Io,
    }
}

fn fail(e: FodeError) -> FodeStatus {
    let step = match &e {
        FodeError::Step { step, .. } => Some(*step),
        _ => None,
    };
    set_error(status_of(&e), e.to_string(), step)
}

fn null(what: &str) -> FodeStatus {
    set_error(FodeStatus::NullPointer, format!("{what} is null"), None)
}

/// Runs `body` with the last error cleared, turning panics into `Panic`.
fn guard(body: impl FnOnce() -> FodeStatus) -> FodeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(FodeStatus::Panic, format!("internal panic: {msg}"), None)
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

struct CallbackRhs {
    f: unsafe extern "C" fn(*mut c_void, f64, *const f64, *mut f64, usize),
    user_data: *mut c_void,
    dim: usize,
}

// The caller promises the callback and its user data are thread-safe.
unsafe impl Send for CallbackRhs {}
unsafe impl Sync for CallbackRhs {}

impl Rhs for CallbackRhs {
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        unsafe { (self.f)(self.user_data, t, y.as_ptr(), dy.as_mut_ptr(), y.len()) }
    }

    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }
}

/// Builds a problem around a C callback. `y0` holds `dim` values.
#[no_mangle]
pub unsafe extern "C" fn fode_problem_new_callback(
    rhs: FodeRhsFn,
    user_data: *mut c_void,
    alpha: f64,
    t_end: f64,
    y0: *const f64,
    dim: usize,
    out: *mut *mut FodeProblem,
) -> FodeStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let Some(f) = rhs else { return null("rhs") };
        let Some(y0) = slice(y0, dim) else { return null("y0") };
        let rhs = Arc::new(CallbackRhs { f, user_data, dim });
        match FractionalProblem::new(alpha, y0.to_vec(), t_end, rhs) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(FodeProblem(p)));
                FodeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds one of the built-in systems by name (`zero`, `constant`,
/// `power-law`, `linear`, `hindmarsh-rose`). Pass `y0 = NULL, dim = 0` for
/// the system's default initial state.
#[no_mangle]
pub unsafe extern "C" fn fode_problem_new_named(
    system: *const c_char,
    params: *const f64,
    n_params: usize,
    alpha: f64,
    t_end: f64,
    y0: *const f64,
    dim: usize,
    out: *mut *mut FodeProblem,
) -> FodeStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        if system.is_null() {
            return null("system");
        }
        let Ok(name) = CStr::from_ptr(system).to_str() else {
            return set_error(FodeStatus::InvalidUtf8, "system name is not UTF-8".into(), None);
        };
        let Some(params) = slice(params, n_params) else { return null("params") };
        let Some(y0) = slice(y0, dim) else { return null("y0") };
        let y0 = (dim > 0).then(|| y0.to_vec());
        match NamedSystem::from_name(name, params).and_then(|s| s.problem(alpha, t_end, y0)) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(FodeProblem(p)));
                FodeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fode_problem_free(problem: *mut FodeProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// State dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fode_problem_dim(problem: *const FodeProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.dim())
}

/// Solves on `n_steps` uniform steps. `workers` is ignored for the serial
/// strategy and `chunk` is used only by the reduction strategy.
#[no_mangle]
pub unsafe extern "C" fn fode_solve(
    problem: *const FodeProblem,
    n_steps: usize,
    strategy: FodeStrategyKind,
    workers: usize,
    chunk: usize,
    out: *mut *mut FodeTrajectory,
) -> FodeStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let Some(problem) = problem.as_ref() else { return null("problem") };
        let strategy = match strategy {
            FodeStrategyKind::Serial => Strategy::Serial,
            FodeStrategyKind::Block => Strategy::Block { workers },
            FodeStrategyKind::Reduction => Strategy::Reduction { workers, chunk },
        };
        let result = GridSpec::for_problem(&problem.0, n_steps)
            .and_then(|grid| fode_core::solve(&problem.0, grid, strategy));
        match result {
            Ok(traj) => {
                let times = (0..traj.len()).map(|n| traj.t(n)).collect();
                *out = Box::into_raw(Box::new(FodeTrajectory { traj, times }));
                FodeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fode_trajectory_free(traj: *mut FodeTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of grid points (`n_steps + 1`), or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fode_trajectory_len(traj: *const FodeTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.len())
}

#[no_mangle]
pub unsafe extern "C" fn fode_trajectory_dim(traj: *const FodeTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.dim())
}

/// Grid times, `len` values. Valid until the trajectory is freed.
#[no_mangle]
pub unsafe extern "C" fn fode_trajectory_times(traj: *const FodeTrajectory) -> *const f64 {
    traj.as_ref().map_or(ptr::null(), |t| t.times.as_ptr())
}

/// Row-major states, `len * dim` values. Valid until the trajectory is freed.
#[no_mangle]
pub unsafe extern "C" fn fode_trajectory_states(traj: *const FodeTrajectory) -> *const f64 {
    traj.as_ref().map_or(ptr::null(), |t| t.traj.states().as_ptr())
}

/// Copies the state at grid point `n` into `out` (capacity `cap >= dim`).
#[no_mangle]
pub unsafe extern "C" fn fode_trajectory_state(
    traj: *const FodeTrajectory,
    n: usize,
    out: *mut f64,
    cap: usize,
) -> FodeStatus {
    guard(|| {
        let Some(traj) = traj.as_ref() else { return null("trajectory") };
        if out.is_null() {
            return null("out");
        }
        let traj = &traj.traj;
        if n >= traj.len() {
            return fail(FodeError::Index { index: n, limit: traj.len() });
        }
        if cap < traj.dim() {
            return fail(FodeError::Index { index: traj.dim() - 1, limit: cap });
        }
        ptr::copy_nonoverlapping(traj.state(n).as_ptr(), out, traj.dim());
        FodeStatus::Ok
    })
}

/// Writes the trajectory CSV (`t,y0,...`) to `path`.
#[no_mangle]
pub unsafe extern "C" fn fode_trajectory_write_csv(traj: *const FodeTrajectory, path: *const c_char) -> FodeStatus {
    guard(|| {
        let Some(traj) = traj.as_ref() else { return null("trajectory") };
        if path.is_null() {
            return null("path");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return set_error(FodeStatus::InvalidUtf8, "path is not UTF-8".into(), None);
        };
        let written = std::fs::File::create(path).and_then(|f| write_trajectory(&traj.traj, f));
        match written {
            Ok(()) => FodeStatus::Ok,
            Err(e) => fail(FodeError::Io(format!("{path}: {e}"))),
        }
    })
}

fn scalar(out: *mut f64, value: fode_core::Result<f64>) -> FodeStatus {
    if out.is_null() {
        return null("out");
    }
    match value {
        Ok(v) => {
            unsafe { *out = v };
            FodeStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn fode_predictor_weight(alpha: f64, n: u64, out: *mut f64) -> FodeStatus {
    guard(|| scalar(out, fode_core::predictor_weight(alpha, n)))
}

#[no_mangle]
pub unsafe extern "C" fn fode_corrector_weight_a(alpha: f64, n: u64, out: *mut f64) -> FodeStatus {
    guard(|| scalar(out, fode_core::corrector_weight_a(alpha, n)))
}

#[no_mangle]
pub unsafe extern "C" fn fode_corrector_weight_c(alpha: f64, n: u64, out: *mut f64) -> FodeStatus {
    guard(|| scalar(out, fode_core::corrector_weight_c(alpha, n)))
}

#[no_mangle]
pub unsafe extern "C" fn fode_gamma(x: f64, out: *mut f64) -> FodeStatus {
    guard(|| scalar(out, fode_core::special::gamma(x)))
}

/// `E_alpha(z)` for `|z| <= 10`.
#[no_mangle]
pub unsafe extern "C" fn fode_mittag_leffler(alpha: f64, z: f64, out: *mut f64) -> FodeStatus {
    guard(|| scalar(out, fode_core::verify::mittag_leffler(alpha, z)))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `cap - 1` bytes) and returns the full message
/// length. Returns 0 when the last call succeeded.
#[no_mangle]
pub unsafe extern "C" fn fode_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(e) = e.as_ref() else {
            if !buf.is_null() && cap > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = e.message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Step index of the last `FODE_STATUS_STEP` failure on this thread.
/// Returns false (and leaves `out` alone) when there is none.
#[no_mangle]
pub unsafe extern "C" fn fode_last_error_step(out: *mut usize) -> bool {
    LAST_ERROR.with(|e| match e.borrow().as_ref().and_then(|e| e.step) {
        Some(s) if !out.is_null() => {
            *out = s;
            true
        }
        _ => false,
    })
}

#[no_mangle]
pub extern "C" fn fode_status_name(status: FodeStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        FodeStatus::Ok => b"ok\0",
        FodeStatus::NullPointer => b"null pointer\0",
        FodeStatus::Domain => b"domain error\0",
        FodeStatus::Config => b"configuration error\0",
        FodeStatus::Index => b"index out of range\0",
        FodeStatus::Step => b"non-finite value during a step\0",
        FodeStatus::Strategy => b"strategy error\0",
        FodeStatus::DegenerateData => b"degenerate data\0",
        FodeStatus::OutOfRange => b"out of validated range\0",
        FodeStatus::Io => b"i/o error\0",
        FodeStatus::InvalidUtf8 => b"invalid UTF-8\0",
        FodeStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn fode_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
