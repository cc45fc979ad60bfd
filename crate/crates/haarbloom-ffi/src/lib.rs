//! C ABI over the dyadic-analysis toolkit. Every object crosses the
//! boundary as an opaque handle owned by this library; every fallible call
//! returns an [`HbStatus`] and stores a human-readable message retrievable
//! with [`hb_last_error_message`]. All entry points catch panics, so no
//! unwinding ever crosses into C.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, UnwindSafe};

use haarbloom::bmo::{bmo_norm, bmo_q_norm, unweighted_bmo_norm};
use haarbloom::operators::{make_random_shift, LinearOperator, ShiftOperator};
use haarbloom::opnorm::{opnorm_l2, opnorm_lp};
use haarbloom::weights::{ap_characteristic, bloom, gen_cascade_weight, Weight};
use haarbloom::{Error, Grid, StepFunction};

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A scalar or array argument violates the documented constraints.
    InvalidArgument = 2,
    /// Two handles that must share a grid do not.
    GridMismatch = 3,
    /// A cube, level, or shift parameter lies outside the grid.
    OutOfRange = 4,
    /// Values violate a numeric contract (positivity, size caps, ...).
    NumericError = 5,
    /// Encoding or decoding failed.
    SerializationError = 6,
    /// The implementation panicked; state may be inconsistent.
    InternalPanic = 7,
}

/// A dyadic grid (opaque).
pub struct HbGrid(Grid);
/// A function constant on finest-level cells (opaque).
pub struct HbStep(StepFunction);
/// A positive weight on a grid (opaque).
pub struct HbWeight(Weight);
/// A dyadic shift operator (opaque).
pub struct HbShift(ShiftOperator);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> HbStatus {
    match e {
        Error::InvalidGrid(_)
        | Error::BudgetExceeded(_)
        | Error::ShiftNotQuantized { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidExponent { .. } => HbStatus::InvalidArgument,
        Error::GridMismatch | Error::SignatureMismatch(..) => HbStatus::GridMismatch,
        Error::CubeOutOfRange(_) | Error::DepthOverflow(_) => HbStatus::OutOfRange,
        Error::NonPositiveWeight { .. }
        | Error::CoefficientBound { .. }
        | Error::MalformedShiftTable(_) => HbStatus::NumericError,
        Error::Serialization(_) => HbStatus::SerializationError,
    }
}

fn fail(e: Error) -> HbStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null_arg(name: &str) -> HbStatus {
    set_error(format!("argument `{name}` is null"));
    HbStatus::NullPointer
}

/// Runs `body` with panics converted to `HbStatus::InternalPanic`.
fn guarded<F: FnOnce() -> HbStatus + UnwindSafe>(body: F) -> HbStatus {
    match catch_unwind(body) {
        Ok(s) => s,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            HbStatus::InternalPanic
        }
    }
}

/// Checked slice view over a C pointer/length pair.
unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() && len > 0 {
        None
    } else if len == 0 {
        Some(&[])
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

fn give<T>(out: *mut *mut T, value: T) -> HbStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    HbStatus::Ok
}

macro_rules! deref {
    ($ptr:ident) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return null_arg(stringify!($ptr)),
        }
    };
}

macro_rules! out_ptr {
    ($ptr:ident) => {
        if $ptr.is_null() {
            return null_arg(stringify!($ptr));
        } else {
            $ptr
        }
    };
}

/// Copies the message of the most recent failure on this thread into `buf`
/// (NUL-terminated, truncated to `len`). Returns the full message length in
/// bytes, excluding the terminator. `buf` may be null to query the length.
///
/// # Safety
///
/// A non-null `buf` must be valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// --- grids -----------------------------------------------------------

/// Creates a grid of dimension `dim` subdivided `depth` times, rigidly
/// translated by `shift` (length `shift_len ≤ dim`, each component a
/// multiple of the finest cell side).
///
/// # Safety
///
/// `shift` must be null (with `shift_len` 0) or point to `shift_len`
/// readable doubles; `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn hb_grid_new(
    dim: usize,
    depth: u32,
    shift: *const f64,
    shift_len: usize,
    out: *mut *mut HbGrid,
) -> HbStatus {
    guarded(|| {
        let out = out_ptr!(out);
        let Some(shift) = (unsafe { slice_arg(shift, shift_len) }) else {
            return null_arg("shift");
        };
        match Grid::new(dim, depth, shift) {
            Ok(g) => give(out, HbGrid(g)),
            Err(e) => fail(e),
        }
    })
}

/// Releases a grid handle; null is ignored.
///
/// # Safety
///
/// `grid` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hb_grid_free(grid: *mut HbGrid) {
    if !grid.is_null() {
        drop(unsafe { Box::from_raw(grid) });
    }
}

/// # Safety
///
/// `grid` must be null or a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hb_grid_dim(grid: *const HbGrid, out: *mut usize) -> HbStatus {
    guarded(|| {
        let g = deref!(grid);
        let out = out_ptr!(out);
        unsafe { *out = g.0.dim() };
        HbStatus::Ok
    })
}

/// # Safety
///
/// `grid` must be null or a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hb_grid_depth(grid: *const HbGrid, out: *mut u32) -> HbStatus {
    guarded(|| {
        let g = deref!(grid);
        let out = out_ptr!(out);
        unsafe { *out = g.0.depth() };
        HbStatus::Ok
    })
}

/// Number of finest-level cells; the length expected by every
/// pointer/length argument below.
///
/// # Safety
///
/// `grid` must be null or a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hb_grid_cell_count(grid: *const HbGrid, out: *mut usize) -> HbStatus {
    guarded(|| {
        let g = deref!(grid);
        let out = out_ptr!(out);
        unsafe { *out = g.0.cell_count() };
        HbStatus::Ok
    })
}

// --- step functions ----------------------------------------------------

/// Wraps `values` (one per cell, row-major) as a function on `grid`.
///
/// # Safety
///
/// `grid` must be null or a live handle; `values` must point to `len`
/// readable doubles; `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn hb_step_new(
    grid: *const HbGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut HbStep,
) -> HbStatus {
    guarded(|| {
        let g = deref!(grid);
        let out = out_ptr!(out);
        let Some(values) = (unsafe { slice_arg(values, len) }) else {
            return null_arg("values");
        };
        match StepFunction::new(g.0.clone(), values.to_vec()) {
            Ok(f) => give(out, HbStep(f)),
            Err(e) => fail(e),
        }
    })
}

/// Releases a function handle; null is ignored.
///
/// # Safety
///
/// `step` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hb_step_free(step: *mut HbStep) {
    if !step.is_null() {
        drop(unsafe { Box::from_raw(step) });
    }
}

/// Copies the cell values into `buf` (length `len` = cell count).
///
/// # Safety
///
/// `step` must be null or a live handle; `buf` must be valid for `len`
/// double writes.
#[no_mangle]
pub unsafe extern "C" fn hb_step_values(
    step: *const HbStep,
    buf: *mut f64,
    len: usize,
) -> HbStatus {
    guarded(|| {
        let f = deref!(step);
        let buf = out_ptr!(buf);
        let vals = f.0.values();
        if len != vals.len() {
            set_error(format!(
                "buffer holds {len} values, grid has {}",
                vals.len()
            ));
            return HbStatus::InvalidArgument;
        }
        unsafe { std::ptr::copy_nonoverlapping(vals.as_ptr(), buf, vals.len()) };
        HbStatus::Ok
    })
}

/// # Safety
///
/// `step` must be null or a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hb_step_integral(step: *const HbStep, out: *mut f64) -> HbStatus {
    guarded(|| {
        let f = deref!(step);
        let out = out_ptr!(out);
        unsafe { *out = f.0.integral() };
        HbStatus::Ok
    })
}

/// Unweighted dyadic oscillation norm of `step`.
///
/// # Safety
///
/// `step` must be null or a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hb_step_bmo_norm(step: *const HbStep, out: *mut f64) -> HbStatus {
    guarded(|| {
        let f = deref!(step);
        let out = out_ptr!(out);
        unsafe { *out = unweighted_bmo_norm(&f.0) };
        HbStatus::Ok
    })
}

// --- weights -----------------------------------------------------------

/// Wraps strictly positive per-cell `values` as a weight on `grid`.
///
/// # Safety
///
/// `grid` must be null or a live handle; `values` must point to `len`
/// readable doubles; `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn hb_weight_new(
    grid: *const HbGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut HbWeight,
) -> HbStatus {
    guarded(|| {
        let g = deref!(grid);
        let out = out_ptr!(out);
        let Some(values) = (unsafe { slice_arg(values, len) }) else {
            return null_arg("values");
        };
        let step = match StepFunction::new(g.0.clone(), values.to_vec()) {
            Ok(f) => f,
            Err(e) => return fail(e),
        };
        match Weight::new(step) {
            Ok(w) => give(out, HbWeight(w)),
            Err(e) => fail(e),
        }
    })
}

/// Releases a weight handle; null is ignored.
///
/// # Safety
///
/// `weight` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hb_weight_free(weight: *mut HbWeight) {
    if !weight.is_null() {
        drop(unsafe { Box::from_raw(weight) });
    }
}

/// Draws a mean-one multiplicative cascade weight (deterministic in `seed`,
/// sibling ratios bounded by `ratio_bound ≥ 1`).
///
/// # Safety
///
/// `grid` must be null or a live handle; `out` must be valid for one
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn hb_weight_cascade(
    grid: *const HbGrid,
    ratio_bound: f64,
    seed: u64,
    out: *mut *mut HbWeight,
) -> HbStatus {
    guarded(|| {
        let g = deref!(grid);
        let out = out_ptr!(out);
        match gen_cascade_weight(&g.0, ratio_bound, seed) {
            Ok(w) => give(out, HbWeight(w)),
            Err(e) => fail(e),
        }
    })
}

/// Muckenhoupt characteristic of `weight` at exponent `p > 1`.
///
/// # Safety
///
/// `weight` must be null or a live handle; `out` must be valid for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn hb_weight_ap(weight: *const HbWeight, p: f64, out: *mut f64) -> HbStatus {
    guarded(|| {
        let w = deref!(weight);
        let out = out_ptr!(out);
        match ap_characteristic(&w.0, p) {
            Ok(rep) => {
                unsafe { *out = rep.value };
                HbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The implied two-weight (Bloom) weight `(μ/λ)^{1/p}`.
///
/// # Safety
///
/// `mu` and `lambda` must be null or live handles; `out` must be valid for
/// one pointer write.
#[no_mangle]
pub unsafe extern "C" fn hb_weight_bloom(
    mu: *const HbWeight,
    lambda: *const HbWeight,
    p: f64,
    out: *mut *mut HbWeight,
) -> HbStatus {
    guarded(|| {
        let mu = deref!(mu);
        let lambda = deref!(lambda);
        let out = out_ptr!(out);
        match bloom(&mu.0, &lambda.0, p) {
            Ok(w) => give(out, HbWeight(w)),
            Err(e) => fail(e),
        }
    })
}

/// Weighted oscillation norm of `b`; with `q = 1` the plain weighted form,
/// otherwise the q-exponent strengthening against the conjugate weight.
///
/// # Safety
///
/// `b` and `weight` must be null or live handles; `out` must be valid for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn hb_bmo_weighted_norm(
    b: *const HbStep,
    weight: *const HbWeight,
    q: f64,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        let b = deref!(b);
        let w = deref!(weight);
        let out = out_ptr!(out);
        let res = if q == 1.0 {
            bmo_norm(&b.0, &w.0)
        } else {
            bmo_q_norm(&b.0, &w.0, q)
        };
        match res {
            Ok(rep) => {
                unsafe { *out = rep.value };
                HbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// --- shift operators ----------------------------------------------------

/// Draws a random shift with parameters `(i, j)` on `grid`, deterministic
/// in `seed`. `dense` fills every admissible table slot; otherwise a sparse
/// random subset is used.
///
/// # Safety
///
/// `grid` must be null or a live handle; `out` must be valid for one
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn hb_shift_random(
    grid: *const HbGrid,
    i: u32,
    j: u32,
    seed: u64,
    dense: bool,
    out: *mut *mut HbShift,
) -> HbStatus {
    guarded(|| {
        let g = deref!(grid);
        let out = out_ptr!(out);
        match make_random_shift(&g.0, i, j, seed, dense) {
            Ok(s) => give(out, HbShift(s)),
            Err(e) => fail(e),
        }
    })
}

/// Releases a shift handle; null is ignored.
///
/// # Safety
///
/// `shift` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hb_shift_free(shift: *mut HbShift) {
    if !shift.is_null() {
        drop(unsafe { Box::from_raw(shift) });
    }
}

/// Applies the shift to `f`, producing a new function handle.
///
/// # Safety
///
/// `shift` and `f` must be null or live handles; `out` must be valid for
/// one pointer write.
#[no_mangle]
pub unsafe extern "C" fn hb_shift_apply(
    shift: *const HbShift,
    f: *const HbStep,
    out: *mut *mut HbStep,
) -> HbStatus {
    guarded(|| {
        let s = deref!(shift);
        let f = deref!(f);
        let out = out_ptr!(out);
        match s.0.apply(&f.0) {
            Ok(g) => give(out, HbStep(g)),
            Err(e) => fail(e),
        }
    })
}

/// Exact `L²(μ) → L²(λ)` operator norm of the shift.
///
/// # Safety
///
/// `shift`, `mu`, and `lambda` must be null or live handles; `out` must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hb_shift_opnorm_l2(
    shift: *const HbShift,
    mu: *const HbWeight,
    lambda: *const HbWeight,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        let s = deref!(shift);
        let mu = deref!(mu);
        let lambda = deref!(lambda);
        let out = out_ptr!(out);
        match opnorm_l2(&s.0, &mu.0, &lambda.0) {
            Ok(est) => {
                unsafe { *out = est.value };
                HbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Witness-certified lower bound on the `L^p(μ) → L^p(λ)` norm
/// (`starts`/`iters` bound the iteration effort; 0 selects the defaults).
///
/// # Safety
///
/// `shift`, `mu`, and `lambda` must be null or live handles; `out` must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hb_shift_opnorm_lp(
    shift: *const HbShift,
    mu: *const HbWeight,
    lambda: *const HbWeight,
    p: f64,
    starts: usize,
    iters: usize,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        let s = deref!(shift);
        let mu = deref!(mu);
        let lambda = deref!(lambda);
        let out = out_ptr!(out);
        let starts = if starts == 0 {
            haarbloom::opnorm::DEFAULT_STARTS
        } else {
            starts
        };
        let iters = if iters == 0 {
            haarbloom::opnorm::DEFAULT_ITERS
        } else {
            iters
        };
        match opnorm_lp(&s.0, &mu.0, &lambda.0, p, starts, iters) {
            Ok(est) => {
                unsafe { *out = est.value };
                HbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
