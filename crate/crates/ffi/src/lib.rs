//! C ABI over the robust-extraction solver.
//!
//! Instances live behind an opaque handle. Reports and menus cross the
//! boundary as UTF-8 JSON strings owned by this library; release them with
//! `re_string_free`. After a non-`Ok` status, `re_last_error` describes the
//! failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robust_extraction::analysis::{classify, WciBudget, WeakConvexIndependence};
use robust_extraction::beliefs::{validate_instance, ExtractionInstance, Instance};
use robust_extraction::synthesis::{
    default_margin, synthesize_full_extraction, synthesize_weak_extraction, Menu, SynthesisError,
};
use robust_extraction::verification::{verify_extraction, ExtractionKind};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReStatus {
    /// The call succeeded and the checked property holds.
    Ok = 0,
    /// The call succeeded and the checked property fails.
    Fails = 1,
    /// The search budget ran out before a decision.
    Unknown = 2,
    NullPointer = 10,
    InvalidUtf8 = 11,
    InvalidInput = 12,
    Internal = 13,
}

/// Opaque validated instance.
pub struct ReInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(ReStatus, String);

fn guard(f: impl FnOnce() -> Result<ReStatus, Failure>) -> ReStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ReStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(ReStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(ReStatus::InvalidUtf8, e.to_string()))
}

unsafe fn instance<'a>(handle: *const ReInstance) -> Result<&'a Instance, Failure> {
    handle
        .as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Failure(ReStatus::NullPointer, "null instance handle".into()))
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(ReStatus::NullPointer, "null output pointer".into()));
    }
    let c = CString::new(text).map_err(|e| Failure(ReStatus::Internal, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure(ReStatus::Internal, e.to_string()))
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure(ReStatus::InvalidInput, e.to_string())
}

/// Parses and validates an instance from JSON. On success `*out` receives a
/// handle to release with `re_instance_free`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn re_instance_from_json(json: *const c_char, out: *mut *mut ReInstance) -> ReStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(ReStatus::NullPointer, "null output pointer".into()));
        }
        let spec = ExtractionInstance::from_json(read_str(json)?).map_err(invalid)?;
        let inner = validate_instance(&spec).map_err(|violations| {
            let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            invalid(lines.join("; "))
        })?;
        *out = Box::into_raw(Box::new(ReInstance { inner }));
        Ok(ReStatus::Ok)
    })
}

/// # Safety
/// `handle` must come from `re_instance_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn re_instance_free(handle: *mut ReInstance) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of types, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn re_instance_type_count(handle: *const ReInstance) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.type_count())
}

/// Writes the classification report. Returns `Unknown` when the weak
/// convex independence search exhausts its budget.
///
/// # Safety
/// `handle` must be a live instance handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn re_classify(handle: *const ReInstance, seed: u64, out: *mut *mut c_char) -> ReStatus {
    guard(|| {
        let inst = instance(handle)?;
        let report = classify(inst, WciBudget::default(), seed).map_err(invalid)?;
        let status = match report.weak_convex_independence {
            WeakConvexIndependence::Unknown { .. } => ReStatus::Unknown,
            _ => ReStatus::Ok,
        };
        write_string(out, to_json(&report)?)?;
        Ok(status)
    })
}

/// Synthesizes a menu. `mode` is `"full"` or `"weak"`. Returns `Fails` when
/// the belief condition for that mode fails; the reason is in `re_last_error`.
///
/// # Safety
/// `handle` must be a live instance handle, `mode` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn re_synthesize(
    handle: *const ReInstance,
    mode: *const c_char,
    seed: u64,
    out: *mut *mut c_char,
) -> ReStatus {
    guard(|| {
        let inst = instance(handle)?;
        let result = match read_str(mode)? {
            "full" => synthesize_full_extraction(inst, &default_margin()),
            "weak" => synthesize_weak_extraction(inst, None, WciBudget::default(), seed, &default_margin()),
            other => return Err(invalid(format!("unknown mode {other:?}"))),
        };
        match result {
            Ok(menu) => {
                write_string(out, menu.to_json())?;
                Ok(ReStatus::Ok)
            }
            Err(SynthesisError::WeakCIUnknown) => Err(Failure(ReStatus::Unknown, SynthesisError::WeakCIUnknown.to_string())),
            Err(e @ (SynthesisError::ConvexIndependenceFails { .. } | SynthesisError::BrokenCertificate { .. })) => {
                Err(Failure(ReStatus::Fails, e.to_string()))
            }
            Err(e) => Err(invalid(e)),
        }
    })
}

/// Verifies a JSON menu. `check` is one of `full`, `weak`, `optimal`,
/// `maximal`. Writes the report and returns `Ok` or `Fails`.
///
/// # Safety
/// Pointers must be valid as for `re_synthesize`.
#[no_mangle]
pub unsafe extern "C" fn re_verify(
    handle: *const ReInstance,
    menu_json: *const c_char,
    check: *const c_char,
    out: *mut *mut c_char,
) -> ReStatus {
    guard(|| {
        let inst = instance(handle)?;
        let menu = Menu::from_json(read_str(menu_json)?).map_err(invalid)?;
        let kind: ExtractionKind = read_str(check)?.parse().map_err(invalid)?;
        let report = verify_extraction(&menu, inst, kind).map_err(invalid)?;
        write_string(out, to_json(&report)?)?;
        Ok(if report.holds { ReStatus::Ok } else { ReStatus::Fails })
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn re_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn re_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
