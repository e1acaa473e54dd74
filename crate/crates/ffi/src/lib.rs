//! C interface to the thinfilm simulator.
//!
//! Every fallible call returns a [`TfStatus`]; on failure the message is
//! available from [`tf_last_error_message`] on the same thread. Objects are
//! opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use thinfilm::bounds::{gronwall_closed_form, GronwallValue};
use thinfilm::cli::{parse_config, run, Subcommand};
use thinfilm::grid::{Boundary, Grid, ScalarField};
use thinfilm::kernel::{eval_f, QuadratureSpec};
use thinfilm::mild::heat_propagate;
use thinfilm::nonlinearity::NonlinearitySpec;
use thinfilm::rothe::{run_ibvp, RotheConfig, Trajectory};
use thinfilm::Error;

/// Result codes. Values 2 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    InvalidArgument = 1,
    Config = 2,
    NonConvergence = 3,
    BlowUp = 4,
    Io = 5,
    Internal = 6,
}

pub const TF_BOUNDARY_PERIODIC: i32 = 0;
pub const TF_BOUNDARY_NEUMANN: i32 = 1;

pub struct TfGrid(Grid);
pub struct TfField(ScalarField);
pub struct TfSpec(NonlinearitySpec);
pub struct TfTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.as_bytes().to_vec());
}

fn status_of(err: &Error) -> TfStatus {
    match err {
        Error::Config(_) => TfStatus::Config,
        Error::InnerNonConvergence { .. } | Error::ContractionFailed { .. } | Error::Quadrature { .. } => {
            TfStatus::NonConvergence
        }
        Error::BlowUpHorizon { .. } | Error::NonFinite { .. } => TfStatus::BlowUp,
        Error::Io { .. } | Error::Format { .. } => TfStatus::Io,
        _ => TfStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TfStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            TfStatus::Internal
        }
    }
}

fn invalid(msg: &str) -> Error {
    Error::InvalidInput(msg.into())
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, Error> {
    p.as_mut().ok_or_else(|| invalid("output pointer is null"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Error> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} handle is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

/// Length in bytes of the last error message, without the terminating NUL.
#[no_mangle]
pub extern "C" fn tf_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len − 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a grid with `dims` axes.
///
/// # Safety
/// `extents` and `points` must point to `dims` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_grid_new(
    dims: usize,
    extents: *const f64,
    points: *const usize,
    boundary: i32,
    out: *mut *mut TfGrid,
) -> TfStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if extents.is_null() || points.is_null() || !(1..=3).contains(&dims) {
            return Err(invalid("need 1 to 3 axes with non-null extents and points"));
        }
        let boundary = match boundary {
            TF_BOUNDARY_PERIODIC => Boundary::Periodic,
            TF_BOUNDARY_NEUMANN => Boundary::NeumannBox,
            b => return Err(invalid(&format!("unknown boundary code {b}"))),
        };
        let g = Grid::new(slice::from_raw_parts(extents, dims), slice::from_raw_parts(points, dims), boundary)?;
        *out = Box::into_raw(Box::new(TfGrid(g)));
        Ok(())
    })
}

/// Number of grid points.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_grid_len(grid: *const TfGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// # Safety
/// `grid` must be null or a handle from [`tf_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_grid_free(grid: *mut TfGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Creates a field from `len` row-major samples.
///
/// # Safety
/// `values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_field_new(
    grid: *const TfGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut TfField,
) -> TfStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let g = handle(grid, "grid")?;
        if values.is_null() {
            return Err(invalid("values pointer is null"));
        }
        let f = ScalarField::new(&g.0, slice::from_raw_parts(values, len).to_vec())?;
        *out = Box::into_raw(Box::new(TfField(f)));
        Ok(())
    })
}

/// Copies the samples of `field` into `buf`, which must hold exactly the
/// grid length.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tf_field_values(field: *const TfField, buf: *mut f64, len: usize) -> TfStatus {
    guard(|| {
        let f = handle(field, "field")?;
        let v = f.0.values();
        if buf.is_null() || len != v.len() {
            return Err(invalid(&format!("buffer must hold {} values", v.len())));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_field_free(field: *mut TfField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

unsafe fn make_spec(out: *mut *mut TfSpec, f: impl FnOnce() -> Result<NonlinearitySpec, Error>) -> TfStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = Box::into_raw(Box::new(TfSpec(f()?)));
        Ok(())
    })
}

/// g ≡ 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_spec_zero(out: *mut *mut TfSpec) -> TfStatus {
    make_spec(out, || Ok(NonlinearitySpec::zero()))
}

/// g(ξ) = (c|ξ|² + 1)ξ.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_spec_cubic(c: f64, out: *mut *mut TfSpec) -> TfStatus {
    make_spec(out, || NonlinearitySpec::cubic(c))
}

/// g(ξ) = |ξ|^{α−1}ξ.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_spec_power(alpha: f64, out: *mut *mut TfSpec) -> TfStatus {
    make_spec(out, || NonlinearitySpec::power(alpha))
}

/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_spec_free(spec: *mut TfSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Runs the semi-implicit Neumann scheme with `steps` steps to time `horizon`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_rothe_run(
    u0: *const TfField,
    spec: *const TfSpec,
    horizon: f64,
    steps: usize,
    out: *mut *mut TfTrajectory,
) -> TfStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let (u0, spec) = (handle(u0, "field")?, handle(spec, "nonlinearity")?);
        let traj = run_ibvp(&u0.0, &spec.0, &RotheConfig::new(horizon, steps)?)?;
        *out = Box::into_raw(Box::new(TfTrajectory(traj)));
        Ok(())
    })
}

/// Number of stored states, including the initial one.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_trajectory_len(traj: *const TfTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.steps().len())
}

/// Copies state `index` into a new field handle.
///
/// # Safety
/// `traj` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_trajectory_state(traj: *const TfTrajectory, index: usize, out: *mut *mut TfField) -> TfStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let t = handle(traj, "trajectory")?;
        let s = t.0.steps().get(index).ok_or_else(|| invalid(&format!("state {index} out of range")))?;
        *out = Box::into_raw(Box::new(TfField(s.u.clone())));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_trajectory_free(traj: *mut TfTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Linear evolution of `u0` over time `t` on a periodic grid.
///
/// # Safety
/// `u0` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_heat_propagate(u0: *const TfField, t: f64, out: *mut *mut TfField) -> TfStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let v = heat_propagate(&handle(u0, "field")?.0, t)?;
        *out = Box::into_raw(Box::new(TfField(v)));
        Ok(())
    })
}

/// Radial kernel profile f_N(η).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_kernel_profile(dimension: usize, eta: f64, out: *mut f64) -> TfStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = eval_f(dimension, eta, &QuadratureSpec::default())?;
        Ok(())
    })
}

/// Closed-form bound for y′ ≤ c₁y^{1+σ} + c₂. Sets `*blow_up` to 1 (and
/// `*out` to infinity) when t is at or past the blow-up time.
///
/// # Safety
/// `out` and `blow_up` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_gronwall_bound(
    y0: f64,
    sigma: f64,
    c1: f64,
    c2: f64,
    t: f64,
    out: *mut f64,
    blow_up: *mut i32,
) -> TfStatus {
    guard(|| {
        let (out, blow_up) = (out_ptr(out)?, out_ptr(blow_up)?);
        match gronwall_closed_form(y0, sigma, c1, c2, t)? {
            GronwallValue::Finite(v) => {
                *out = v;
                *blow_up = 0;
            }
            GronwallValue::BlowUp => {
                *out = f64::INFINITY;
                *blow_up = 1;
            }
        }
        Ok(())
    })
}

/// Parses `config_text` for `subcommand` and runs it, writing artifacts
/// into `out_dir` exactly as the command-line tool does.
///
/// # Safety
/// All pointers must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn tf_run(subcommand: *const c_char, config_text: *const c_char, out_dir: *const c_char) -> TfStatus {
    guard(|| {
        let sub: Subcommand = text(subcommand, "subcommand")?.parse().map_err(|e: String| invalid(&e))?;
        let cfg = parse_config(text(config_text, "config text")?, sub)?;
        run(&cfg, Path::new(text(out_dir, "output directory")?))
    })
}
