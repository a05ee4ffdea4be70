//! C ABI for the hidden-shift laboratory.
//!
//! The surface is deliberately small: parse an instance file into an opaque
//! handle, run one algorithm by name, and receive the report as a JSON string.
//! All strings are UTF-8, all returned strings must be released with
//! [`shiftlab_string_free`], and handles with [`shiftlab_instance_free`].
//! Functions set a thread-local error message readable via
//! [`shiftlab_last_error`] when they fail.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use shiftlab::cli::{self, InstanceFile};
use shiftlab::hiddenshift::{AlgorithmId, HiddenShiftInstance};
use shiftlab::phasetuned::PhaseAssignment;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Status codes returned by the run entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftlabStatus {
    Ok = 0,
    /// A null pointer or malformed UTF-8 argument.
    InvalidArgument = 1,
    /// The instance JSON failed to parse or validate.
    ParseError = 2,
    /// The algorithm rejected the instance or the name is unknown.
    RunError = 3,
}

/// Opaque parsed instance.
pub struct ShiftlabInstance {
    instance: HiddenShiftInstance,
    phases: Option<PhaseAssignment>,
    echo: InstanceFile,
}

/// Parses a JSON instance description. Returns null on failure (see
/// `shiftlab_last_error`). The result must be freed with
/// `shiftlab_instance_free`.
///
/// # Safety
/// `json` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_instance_parse(json: *const c_char) -> *mut ShiftlabInstance {
    if json.is_null() {
        set_error("null instance string".into());
        return ptr::null_mut();
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("instance string is not UTF-8".into());
            return ptr::null_mut();
        }
    };
    let file: InstanceFile = match serde_json::from_str(text) {
        Ok(f) => f,
        Err(e) => {
            set_error(format!("instance schema violation: {e}"));
            return ptr::null_mut();
        }
    };
    match cli::parse_instance(&file) {
        Ok((instance, phases)) => {
            Box::into_raw(Box::new(ShiftlabInstance { instance, phases, echo: file }))
        }
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Releases an instance handle. Passing null is a no-op.
///
/// # Safety
/// `handle` must come from `shiftlab_instance_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_instance_free(handle: *mut ShiftlabInstance) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Runs one algorithm (by its kebab-case name) on a parsed instance and writes
/// a NUL-terminated JSON report into `out_json`. On success the caller owns the
/// string and must free it with `shiftlab_string_free`.
///
/// # Safety
/// `handle` and `algorithm` must be valid pointers; `out_json` must point to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_run(
    handle: *const ShiftlabInstance,
    algorithm: *const c_char,
    out_json: *mut *mut c_char,
) -> ShiftlabStatus {
    if handle.is_null() || algorithm.is_null() || out_json.is_null() {
        set_error("null argument".into());
        return ShiftlabStatus::InvalidArgument;
    }
    let name = match CStr::from_ptr(algorithm).to_str() {
        Ok(n) => n,
        Err(_) => {
            set_error("algorithm name is not UTF-8".into());
            return ShiftlabStatus::InvalidArgument;
        }
    };
    let algo: AlgorithmId = match name.parse() {
        Ok(a) => a,
        Err(e) => {
            set_error(format!("{e}"));
            return ShiftlabStatus::RunError;
        }
    };
    let h = &*handle;
    let report = match cli::run_algorithm(&h.instance, h.phases.as_ref(), algo, None) {
        Ok(r) => r,
        Err(e) => {
            set_error(e.to_string());
            return ShiftlabStatus::RunError;
        }
    };
    let file = cli::ReportFile { instance: h.echo.clone(), reports: vec![report] };
    let rendered = match serde_json::to_string_pretty(&file) {
        Ok(r) => r,
        Err(e) => {
            set_error(format!("report serialization failed: {e}"));
            return ShiftlabStatus::RunError;
        }
    };
    match CString::new(rendered) {
        Ok(c) => {
            *out_json = c.into_raw();
            ShiftlabStatus::Ok
        }
        Err(_) => {
            set_error("report contained an interior NUL".into());
            ShiftlabStatus::RunError
        }
    }
}

/// Frees a string returned by `shiftlab_run`. Passing null is a no-op.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The last error message raised on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn shiftlab_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.as_ptr(),
        None => ptr::null(),
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn shiftlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
