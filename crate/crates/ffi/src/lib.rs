//! C ABI over `minlen`.
//!
//! Momentum maps are opaque handles created by [`minlen_map_new`] and released
//! with [`minlen_map_free`]. Every fallible call returns a [`MinlenStatus`];
//! results go through out-pointers, and a description of the last failure on
//! the calling thread is available from [`minlen_last_error`]. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use minlen::entropy::{analytic_hk, min_entropy_minlength};
use minlen::spectral::{solve, SolverConfig};
use minlen::tradeoff::{lambda_grid, minimal_length_variance, sweep_tradeoff};
use minlen::{build_momentum_map, Error, Modification, ModificationKind, MomentumMap};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinlenStatus {
    Ok = 0,
    InvalidInput = 1,
    Domain = 2,
    Accuracy = 3,
    Unbounded = 4,
    Solver = 5,
    Unsupported = 6,
    NullPointer = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinlenKind {
    Kmm = 0,
    Cosh = 1,
    Quartic = 2,
    Poly = 3,
}

/// Opaque momentum map `p(k)` of a modification.
pub struct MinlenMap {
    inner: MomentumMap,
}

/// Refined ground state of `H_λ` and its variances.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MinlenSolution {
    pub lambda: f64,
    pub energy: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    pub error_estimate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MinlenTradeoffPoint {
    pub lambda: f64,
    pub u: f64,
    pub delta_x: f64,
    pub delta_p: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> MinlenStatus {
    match err {
        Error::InvalidInput(_) | Error::NotNormalized { .. } | Error::Io(_) | Error::Json(_) => {
            MinlenStatus::InvalidInput
        }
        Error::Domain(_) | Error::Divergence { .. } => MinlenStatus::Domain,
        Error::Accuracy { .. } | Error::Evaluation { .. } => MinlenStatus::Accuracy,
        Error::UnboundedDomain => MinlenStatus::Unbounded,
        Error::Solver { .. } => MinlenStatus::Solver,
        Error::Unsupported(_) => MinlenStatus::Unsupported,
        Error::AtLambda { source, .. } => status_of(source),
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (MinlenStatus, String)>) -> MinlenStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            MinlenStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            MinlenStatus::Panic
        }
    }
}

fn fail(err: Error) -> (MinlenStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (MinlenStatus, String) {
    (MinlenStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `map` must be null or a live handle from [`minlen_map_new`].
unsafe fn map_ref<'a>(map: *const MinlenMap) -> Result<&'a MomentumMap, (MinlenStatus, String)> {
    map.as_ref().map(|m| &m.inner).ok_or_else(|| null("map"))
}

/// Builds the momentum map of a modification. `coefficients` (length
/// `coefficient_count`) are read only for `MINLEN_KIND_POLY`, where `beta`
/// is ignored. On success `*out` receives a handle owned by the caller.
///
/// # Safety
/// `out` must be valid for writes; `coefficients` must point to
/// `coefficient_count` readable doubles when the count is non-zero.
#[no_mangle]
pub unsafe extern "C" fn minlen_map_new(
    kind: MinlenKind,
    beta: f64,
    coefficients: *const f64,
    coefficient_count: usize,
    tol: f64,
    out: *mut *mut MinlenMap,
) -> MinlenStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let coeffs = if coefficient_count == 0 {
            Vec::new()
        } else if coefficients.is_null() {
            return Err(null("coefficients"));
        } else {
            std::slice::from_raw_parts(coefficients, coefficient_count).to_vec()
        };
        let m = match kind {
            MinlenKind::Kmm => Modification::new(ModificationKind::Kmm, beta, Vec::new()),
            MinlenKind::Cosh => Modification::new(ModificationKind::Cosh, beta, Vec::new()),
            MinlenKind::Quartic => Modification::new(ModificationKind::Quartic, beta, Vec::new()),
            MinlenKind::Poly => Modification::even_polynomial(coeffs),
        }
        .map_err(fail)?;
        let inner = build_momentum_map(&m, tol).map_err(fail)?;
        *out = Box::into_raw(Box::new(MinlenMap { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `map` must be null or a handle from [`minlen_map_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn minlen_map_free(map: *mut MinlenMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Cut-off `k_max`; infinity for unbounded maps.
///
/// # Safety
/// `map` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn minlen_map_kmax(map: *const MinlenMap, out: *mut f64) -> MinlenStatus {
    guard(|| {
        let map = map_ref(map)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = map.k_max();
        Ok(())
    })
}

/// Modified momentum `p(k)` for `|k| < k_max`.
///
/// # Safety
/// `map` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn minlen_map_eval_p(map: *const MinlenMap, k: f64, out: *mut f64) -> MinlenStatus {
    guard(|| {
        let map = map_ref(map)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = map.eval_p(k).map_err(fail)?;
        Ok(())
    })
}

/// Ground state of `H_λ` on `n` interior nodes (refined twice), with
/// variances.
///
/// # Safety
/// `map` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn minlen_solve(
    map: *const MinlenMap,
    lambda: f64,
    n: usize,
    tol: f64,
    out: *mut MinlenSolution,
) -> MinlenStatus {
    guard(|| {
        let map = map_ref(map)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = solve(map, lambda, SolverConfig { n, tol }).map_err(fail)?;
        *out = MinlenSolution {
            lambda: s.lambda,
            energy: s.energy,
            delta_x: s.delta_x,
            delta_p: s.delta_p,
            error_estimate: s.error_estimate,
        };
        Ok(())
    })
}

/// Optimal trade-off curve at `count` Chebyshev-spaced λ in
/// `[lambda_min, 1]`. Writes `count` points into `points` when `capacity`
/// suffices; `*written` always receives `count`.
///
/// # Safety
/// `map` must be a live handle, `written` valid for writes and `points`
/// valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn minlen_tradeoff(
    map: *const MinlenMap,
    count: usize,
    lambda_min: f64,
    points: *mut MinlenTradeoffPoint,
    capacity: usize,
    written: *mut usize,
) -> MinlenStatus {
    guard(|| {
        let map = map_ref(map)?;
        let written = written.as_mut().ok_or_else(|| null("written"))?;
        *written = count;
        if capacity < count {
            return Err((
                MinlenStatus::BufferTooSmall,
                format!("need room for {count} points, got {capacity}"),
            ));
        }
        if points.is_null() {
            return Err(null("points"));
        }
        let lambdas = lambda_grid(count, lambda_min).map_err(fail)?;
        let curve = sweep_tradeoff(map, &lambdas, SolverConfig::default()).map_err(fail)?;
        let dst = std::slice::from_raw_parts_mut(points, count);
        for (d, p) in dst.iter_mut().zip(&curve.points) {
            *d = MinlenTradeoffPoint {
                lambda: p.lambda,
                u: p.u,
                delta_x: p.delta_x,
                delta_p: p.delta_p,
            };
        }
        Ok(())
    })
}

/// Smallest position variance `π²/(4k_max²)`; `MINLEN_STATUS_UNBOUNDED`
/// without a cut-off.
///
/// # Safety
/// `map` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn minlen_minimal_length_variance(map: *const MinlenMap, out: *mut f64) -> MinlenStatus {
    guard(|| {
        let map = map_ref(map)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = minimal_length_variance(map).ok_or_else(|| fail(Error::UnboundedDomain))?;
        Ok(())
    })
}

/// Minimal position min-entropy `-log(k_max/π)` in nats;
/// `MINLEN_STATUS_UNBOUNDED` without a cut-off.
///
/// # Safety
/// `map` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn minlen_min_entropy_minlength(map: *const MinlenMap, out: *mut f64) -> MinlenStatus {
    guard(|| {
        let map = map_ref(map)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = min_entropy_minlength(map).ok_or_else(|| fail(Error::UnboundedDomain))?;
        Ok(())
    })
}

/// Momentum entropy of `∝ cos(√β k)^γ`, in nats.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn minlen_cos_power_hk(beta: f64, gamma: f64, out: *mut f64) -> MinlenStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = analytic_hk(beta, gamma).map_err(fail)?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn minlen_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn minlen_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
