//! C ABI for `semilab`.
//!
//! Every fallible function returns a [`SemilabStatus`] and writes results
//! through out-pointers. On failure the message is kept per thread and
//! can be read with [`semilab_last_error_message`]. Handles are opaque and
//! released with their matching `_free` function; strings returned by the
//! library are released with [`semilab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semilab::discrete::{poisson_delta_log, psi_s_auto, FuncOnN, MMParams, MmKernel};
use semilab::harness::{self, ExperimentConfig, ExperimentResult, Verdict};
use semilab::laguerre::log_hess_32;
use semilab::seed::seed_derive;
use semilab::specfun::alpha_integral;
use semilab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemilabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed configuration, unknown experiment or unsupported request.
    Config = 3,
    /// Argument outside the domain of the routine.
    Domain = 4,
    /// Accuracy, range or degeneracy failure inside a computation.
    Numeric = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemilabVerdict {
    Pass = 0,
    Fail = 1,
    Exploratory = 2,
}

/// Precomputed M/M/∞ transition kernel.
pub struct SemilabMmKernel(MmKernel);

/// Output of one experiment run.
pub struct SemilabResult(ExperimentResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(SemilabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) | Error::Json(_) | Error::Unsupported(_) => SemilabStatus::Config,
            Error::Domain(_) | Error::Precondition(_) | Error::UnsupportedDegree { .. } | Error::Growth(_) => {
                SemilabStatus::Domain
            }
            Error::Io(_) | Error::Csv(_) => SemilabStatus::Io,
            _ => SemilabStatus::Numeric,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SemilabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SemilabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SemilabStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside semilab".into());
            SemilabStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SemilabStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn to_c_string(bytes: Vec<u8>) -> Result<*mut c_char, Fail> {
    CString::new(bytes)
        .map(CString::into_raw)
        .map_err(|_| Fail(SemilabStatus::Numeric, "output contains a nul byte".into()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn semilab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn semilab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn semilab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `Δ log π_θ(n)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_poisson_delta_log(theta: f64, n: u64, out: *mut f64) -> SemilabStatus {
    guard(|| write(out, poisson_delta_log(theta, n)?, "out"))
}

/// `Ψ_s(n)` and the `k` attaining the supremum.
///
/// # Safety
/// `out_psi` must be valid for writes; `out_argmax` may be null.
#[no_mangle]
pub unsafe extern "C" fn semilab_psi_s(s: f64, n: u64, out_psi: *mut f64, out_argmax: *mut u64) -> SemilabStatus {
    guard(|| {
        let v = psi_s_auto(s, n)?;
        write(out_psi, v.psi, "out_psi")?;
        if !out_argmax.is_null() {
            out_argmax.write(v.argmax_k);
        }
        Ok(())
    })
}

/// `∫₀ᵗ (sinh(a(t−s))/sinh(at))² ds`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_alpha_integral(a: f64, t: f64, out: *mut f64) -> SemilabStatus {
    guard(|| write(out, alpha_integral(a, t)?, "out"))
}

/// `∂²_x ln G_t(x, y)` for the Laguerre kernel with `α = 3/2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_log_hess_32(t: f64, x: f64, y: f64, out: *mut f64) -> SemilabStatus {
    guard(|| write(out, log_hess_32(t, x, y)?, "out"))
}

/// Child seed derived from `root` and `n_labels` UTF-8 labels.
///
/// # Safety
/// `labels` must point to `n_labels` nul-terminated strings; `out` must
/// be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_seed_derive(
    root: u64,
    labels: *const *const c_char,
    n_labels: usize,
    out: *mut u64,
) -> SemilabStatus {
    guard(|| {
        if labels.is_null() && n_labels > 0 {
            return Err(null("labels"));
        }
        let mut owned = Vec::with_capacity(n_labels);
        for i in 0..n_labels {
            owned.push(str_arg(*labels.add(i), "label")?);
        }
        write(out, seed_derive(root, &owned), "out")
    })
}

/// Kernel of the M/M/∞ queue with `ρ = λ/μ`, `μ = 1`, at time `t`, for
/// starting states `0..=n_max` and targets `0..=k_max`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_mm_kernel_new(
    rho: f64,
    t: f64,
    n_max: u64,
    k_max: u64,
    out: *mut *mut SemilabMmKernel,
) -> SemilabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n_max > 1 << 20 || k_max > 1 << 20 {
            return Err(Fail(SemilabStatus::Domain, "kernel dimensions above 2^20".into()));
        }
        let params = MMParams::with_rho(rho, t)?;
        out.write(Box::into_raw(Box::new(SemilabMmKernel(MmKernel::new(params, n_max, k_max)))));
        Ok(())
    })
}

/// Largest starting state of the kernel, or 0 for a null handle.
///
/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semilab_mm_kernel_n_max(kernel: *const SemilabMmKernel) -> u64 {
    kernel.as_ref().map_or(0, |k| k.0.n_max())
}

/// `ln P_t f(n)` for `n = 0..=n_max`, where `f` is given by its
/// `f_len` values on `0..f_len` and vanishes beyond. `out_len` must be at
/// least `n_max + 1`.
///
/// # Safety
/// `kernel` must be a live handle, `f` valid for `f_len` reads and `out`
/// valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_mm_kernel_ln_apply(
    kernel: *const SemilabMmKernel,
    f: *const f64,
    f_len: usize,
    out: *mut f64,
    out_len: usize,
) -> SemilabStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        if f.is_null() || f_len == 0 {
            return Err(null("f"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let need = k.0.n_max() as usize + 1;
        if out_len < need {
            return Err(Fail(SemilabStatus::BufferTooSmall, format!("out needs {need} entries, got {out_len}")));
        }
        let vals = std::slice::from_raw_parts(f, f_len).to_vec();
        if vals.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Fail(SemilabStatus::Domain, "f must be finite and non-negative".into()));
        }
        let support = (f_len - 1) as u64;
        let func = FuncOnN::with_support(move |i| vals.get(i as usize).copied().unwrap_or(0.0), support);
        let ln = k.0.ln_apply(&func)?;
        std::slice::from_raw_parts_mut(out, need).copy_from_slice(&ln);
        Ok(())
    })
}

/// # Safety
/// `kernel` must come from [`semilab_mm_kernel_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn semilab_mm_kernel_free(kernel: *mut SemilabMmKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Runs the experiment described by a JSON configuration. Nothing is
/// written to disk.
///
/// # Safety
/// `config_json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_experiment_run(config_json: *const c_char, out: *mut *mut SemilabResult) -> SemilabStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig::from_json(text)?;
        let result = harness::run(&cfg)?;
        out.write(Box::into_raw(Box::new(SemilabResult(result))));
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_result_verdict(result: *const SemilabResult, out: *mut SemilabVerdict) -> SemilabStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let v = match r.0.metadata.verdict {
            Verdict::Pass => SemilabVerdict::Pass,
            Verdict::Fail => SemilabVerdict::Fail,
            Verdict::Exploratory => SemilabVerdict::Exploratory,
        };
        write(out, v, "out")
    })
}

/// # Safety
/// `result` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_result_rows(result: *const SemilabResult, out: *mut usize) -> SemilabStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        write(out, r.0.table.rows.len(), "out")
    })
}

/// Result table as CSV. Free the string with [`semilab_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_result_csv(result: *const SemilabResult, out: *mut *mut c_char) -> SemilabStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(to_c_string(harness::table_csv(&r.0.table)?)?);
        Ok(())
    })
}

/// Run metadata as JSON. Free the string with [`semilab_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semilab_result_metadata_json(result: *const SemilabResult, out: *mut *mut c_char) -> SemilabStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = serde_json::to_vec_pretty(&r.0.metadata).map_err(Error::from)?;
        out.write(to_c_string(json)?);
        Ok(())
    })
}

/// # Safety
/// `result` must come from [`semilab_experiment_run`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn semilab_result_free(result: *mut SemilabResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
