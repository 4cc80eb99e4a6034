//! C ABI over `mdpvi`.
//!
//! Every entry point returns an [`MdpviStatus`]; results come back through
//! out-parameters. On failure the message is kept per thread and can be read
//! with [`mdpvi_last_error_message`]. MDPs and value-iteration runs are
//! opaque handles owned by the caller and released with the matching
//! `*_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mdpvi::{
    bounds::GammaMode, compute_gamma, compute_gamma_prime, full_report, policy_iterate, value_iterate, DiscountFactor,
    Error, Mdp, ValueVector, ViRunResult,
};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdpviStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// JSON could not be parsed.
    ParseError = 3,
    /// The MDP or a parameter failed validation.
    InvalidInput = 4,
    /// A caller buffer has the wrong length.
    BufferLength = 5,
    /// Value iteration hit its iteration cap.
    IterationCap = 6,
    /// A policy-evaluation system was singular.
    Singular = 7,
    /// A panic was caught inside the library.
    Internal = 8,
}

/// Validated MDP.
pub struct MdpviMdp {
    inner: Mdp,
}

/// Outcome of one value-iteration run.
pub struct MdpviRun {
    inner: ViRunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Fail(MdpviStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Json(_) => MdpviStatus::ParseError,
            Error::IterationCapExceeded { .. } => MdpviStatus::IterationCap,
            Error::Singular => MdpviStatus::Singular,
            _ => MdpviStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MdpviStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            MdpviStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MdpviStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(MdpviStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, expected: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != expected {
        return Err(Fail(
            MdpviStatus::BufferLength,
            format!("{what} has length {len}, expected {expected}"),
        ));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

/// Null `v0` means the zero vector.
unsafe fn initial_value(mdp: &Mdp, v0: *const f64, len: usize) -> Result<ValueVector, Fail> {
    let m = mdp.num_states();
    if v0.is_null() {
        return Ok(ValueVector::zeros(m));
    }
    if len != m {
        return Err(Fail(
            MdpviStatus::BufferLength,
            format!("v0 has length {len}, expected {m}"),
        ));
    }
    Ok(ValueVector::new(slice::from_raw_parts(v0, len).to_vec())?)
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn mdpvi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mdpvi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates an MDP from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_mdp_from_json(json: *const c_char, out: *mut *mut MdpviMdp) -> MdpviStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(MdpviStatus::InvalidUtf8, e.to_string()))?;
        let inner = Mdp::from_json_str(text)?;
        *out = Box::into_raw(Box::new(MdpviMdp { inner }));
        Ok(())
    })
}

/// # Safety
/// `mdp` must come from [`mdpvi_mdp_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_mdp_free(mdp: *mut MdpviMdp) {
    if !mdp.is_null() {
        drop(Box::from_raw(mdp));
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `mdp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_mdp_num_states(mdp: *const MdpviMdp) -> usize {
    mdp.as_ref().map_or(0, |m| m.inner.num_states())
}

/// Runs span-stopped value iteration. `v0` may be null for zeros.
///
/// # Safety
/// `mdp` must be a live handle, `v0` null or `v0_len` readable doubles,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_value_iterate(
    mdp: *const MdpviMdp,
    alpha: f64,
    epsilon: f64,
    v0: *const f64,
    v0_len: usize,
    out: *mut *mut MdpviRun,
) -> MdpviStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let v0 = initial_value(mdp, v0, v0_len)?;
        let inner = value_iterate(mdp, alpha, epsilon, &v0)?;
        *out = Box::into_raw(Box::new(MdpviRun { inner }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`mdpvi_value_iterate`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_run_free(run: *mut MdpviRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Backups performed, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_run_iterations(run: *const MdpviRun) -> u64 {
    run.as_ref().map_or(0, |r| r.inner.iterations)
}

/// Length of the span trace (equals the iteration count).
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_run_span_trace_len(run: *const MdpviRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.span_trace.len())
}

/// Copies the 0-based greedy action of each state into `out[0..len]`.
///
/// # Safety
/// `run` must be a live handle and `out` hold `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_run_policy(run: *const MdpviRun, out: *mut usize, len: usize) -> MdpviStatus {
    guard(|| {
        let run = &deref(run, "run")?.inner;
        let choices = run.policy.choices();
        out_slice(out, len, choices.len(), "out")?.copy_from_slice(choices);
        Ok(())
    })
}

/// Copies the last iterate.
///
/// # Safety
/// `run` must be a live handle and `out` hold `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_run_final_value(run: *const MdpviRun, out: *mut f64, len: usize) -> MdpviStatus {
    guard(|| {
        let run = &deref(run, "run")?.inner;
        let v = run.final_value.as_slice();
        out_slice(out, len, v.len(), "out")?.copy_from_slice(v);
        Ok(())
    })
}

/// Copies the span of each successive difference.
///
/// # Safety
/// `run` must be a live handle and `out` hold `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_run_span_trace(run: *const MdpviRun, out: *mut f64, len: usize) -> MdpviStatus {
    guard(|| {
        let run = &deref(run, "run")?.inner;
        out_slice(out, len, run.span_trace.len(), "out")?.copy_from_slice(&run.span_trace);
        Ok(())
    })
}

/// Exact optimum by policy iteration. Both buffers have one entry per state;
/// either may be null if not wanted.
///
/// # Safety
/// `mdp` must be a live handle; non-null buffers hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_policy_iterate(
    mdp: *const MdpviMdp,
    alpha: f64,
    policy_out: *mut usize,
    value_out: *mut f64,
    len: usize,
) -> MdpviStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.inner;
        let m = mdp.num_states();
        let result = policy_iterate(mdp, DiscountFactor::new(alpha)?)?;
        if !policy_out.is_null() {
            out_slice(policy_out, len, m, "policy_out")?.copy_from_slice(result.optimal_policy.choices());
        }
        if !value_out.is_null() {
            out_slice(value_out, len, m, "value_out")?.copy_from_slice(result.optimal_value.as_slice());
        }
        Ok(())
    })
}

/// Exact `gamma` and the cheap upper estimate `gamma'`. Either output may be
/// null.
///
/// # Safety
/// `mdp` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_gamma(mdp: *const MdpviMdp, gamma: *mut f64, gamma_prime: *mut f64) -> MdpviStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.inner;
        if !gamma.is_null() {
            *gamma = compute_gamma(mdp);
        }
        if !gamma_prime.is_null() {
            *gamma_prime = compute_gamma_prime(mdp);
        }
        Ok(())
    })
}

/// Full bound report as a JSON string; release it with
/// [`mdpvi_string_free`]. `v0` may be null for zeros.
///
/// # Safety
/// As for [`mdpvi_value_iterate`].
#[no_mangle]
pub unsafe extern "C" fn mdpvi_bounds_json(
    mdp: *const MdpviMdp,
    alpha: f64,
    epsilon: f64,
    v0: *const f64,
    v0_len: usize,
    out: *mut *mut c_char,
) -> MdpviStatus {
    guard(|| {
        let mdp = &deref(mdp, "mdp")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let v0 = initial_value(mdp, v0, v0_len)?;
        let report = full_report(mdp, alpha, epsilon, &v0, GammaMode::default())?;
        let text = serde_json::to_string(&report).map_err(Error::from)?;
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mdpvi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
