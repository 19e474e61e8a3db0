//! C ABI for the mixmeas library.
//!
//! Handles are opaque pointers owned by Rust; every constructor has a
//! matching `_free`, and strings returned by the library are released with
//! [`mixmeas_string_free`]. Fallible calls return [`MixmeasStatus`] and
//! leave a message readable through [`mixmeas_last_error_message`] until the
//! next failing call on the same thread.
//!
//! The generated header lives at `include/mixmeas.h` (regenerated by the
//! build script via cbindgen).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mixmeas::error::Error;
use mixmeas::fidelity;
use mixmeas::povm::{self, Povm};
use mixmeas::prior::{parse_prior_spec, RadialPrior};
use mixmeas::quad;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixmeasStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ComputeError = 4,
    Panic = 5,
}

/// Opaque handle to a validated isotropic prior.
pub struct MixmeasPrior(RadialPrior);

/// Opaque handle to a built POVM.
pub struct MixmeasPovm(Povm);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(err: &Error) -> MixmeasStatus {
    match err {
        Error::PriorSchema(_)
        | Error::PriorNormalization { .. }
        | Error::RadiusOutOfRange { .. }
        | Error::Json(_)
        | Error::Io(_) => MixmeasStatus::ParseError,
        Error::SizeCap { .. }
        | Error::ParityMismatch { .. }
        | Error::UnsupportedCopies { .. }
        | Error::UnsupportedTwiceS { .. }
        | Error::MissingDirectionSet { .. }
        | Error::InfeasibleCount { .. }
        | Error::GuessCountMismatch { .. }
        | Error::InvalidBloch { .. } => MixmeasStatus::InvalidArgument,
        _ => MixmeasStatus::ComputeError,
    }
}

fn fail(err: &Error) -> MixmeasStatus {
    set_error(&err.to_string());
    status_for(err)
}

/// Runs `f`, converting panics into a status instead of unwinding into C.
fn guarded(f: impl FnOnce() -> MixmeasStatus) -> MixmeasStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MixmeasStatus::Panic
        }
    }
}

fn effective_order(order: u32) -> usize {
    if order == 0 {
        quad::DEFAULT_ORDER
    } else {
        order as usize
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mixmeas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mixmeas_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a prior from a builtin name (`pure`, `random`, `uniform-ball`),
/// the shorthand `two-point:m1@b1,m2@b2`, or a JSON document, and stores a
/// new handle in `out`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer; the
/// returned handle must be released with [`mixmeas_prior_free`].
#[no_mangle]
pub unsafe extern "C" fn mixmeas_prior_parse(
    spec: *const c_char,
    out: *mut *mut MixmeasPrior,
) -> MixmeasStatus {
    guarded(|| {
        if spec.is_null() || out.is_null() {
            set_error("null pointer argument");
            return MixmeasStatus::NullPointer;
        }
        let Ok(text) = unsafe { CStr::from_ptr(spec) }.to_str() else {
            set_error("spec is not valid UTF-8");
            return MixmeasStatus::ParseError;
        };
        match parse_prior_spec(text) {
            Ok(prior) => {
                unsafe { *out = Box::into_raw(Box::new(MixmeasPrior(prior))) };
                MixmeasStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a prior handle; a null pointer is a no-op.
///
/// # Safety
/// `prior` must have been produced by [`mixmeas_prior_parse`] and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn mixmeas_prior_free(prior: *mut MixmeasPrior) {
    if !prior.is_null() {
        drop(unsafe { Box::from_raw(prior) });
    }
}

/// Maximal mean fidelity by the closed form. `order` = 0 uses the default
/// quadrature order.
///
/// # Safety
/// `prior` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixmeas_fbar_closed(
    prior: *const MixmeasPrior,
    copies: u32,
    order: u32,
    out: *mut f64,
) -> MixmeasStatus {
    guarded(|| {
        let (Some(prior), false) = (unsafe { prior.as_ref() }, out.is_null()) else {
            set_error("null pointer argument");
            return MixmeasStatus::NullPointer;
        };
        match fidelity::fbar_max_closed(&prior.0, copies, effective_order(order)) {
            Ok(report) => {
                unsafe { *out = report.value_closed };
                MixmeasStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Maximal mean fidelity by direct integration over outcomes and prior.
///
/// # Safety
/// `prior` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixmeas_fbar_direct(
    prior: *const MixmeasPrior,
    copies: u32,
    order: u32,
    out: *mut f64,
) -> MixmeasStatus {
    guarded(|| {
        let (Some(prior), false) = (unsafe { prior.as_ref() }, out.is_null()) else {
            set_error("null pointer argument");
            return MixmeasStatus::NullPointer;
        };
        let order = effective_order(order);
        let result = povm::build_povm_with_order(copies, &prior.0, order)
            .and_then(|povm| fidelity::fbar_direct(&povm, &prior.0, order));
        match result {
            Ok(value) => {
                unsafe { *out = value };
                MixmeasStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Guess magnitude r_{N,s} for one sector.
///
/// # Safety
/// `prior` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixmeas_guess_magnitude(
    prior: *const MixmeasPrior,
    copies: u32,
    twice_s: u32,
    order: u32,
    out: *mut f64,
) -> MixmeasStatus {
    guarded(|| {
        let (Some(prior), false) = (unsafe { prior.as_ref() }, out.is_null()) else {
            set_error("null pointer argument");
            return MixmeasStatus::NullPointer;
        };
        match povm::guess_magnitude(&prior.0, copies, twice_s, effective_order(order)) {
            Ok(value) => {
                unsafe { *out = value };
                MixmeasStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Builds the minimal POVM for N copies and stores a new handle in `out`.
///
/// # Safety
/// `prior` must be a live handle and `out` a valid pointer; the returned
/// handle must be released with [`mixmeas_povm_free`].
#[no_mangle]
pub unsafe extern "C" fn mixmeas_povm_build(
    prior: *const MixmeasPrior,
    copies: u32,
    order: u32,
    out: *mut *mut MixmeasPovm,
) -> MixmeasStatus {
    guarded(|| {
        let (Some(prior), false) = (unsafe { prior.as_ref() }, out.is_null()) else {
            set_error("null pointer argument");
            return MixmeasStatus::NullPointer;
        };
        match povm::build_povm_with_order(copies, &prior.0, effective_order(order)) {
            Ok(povm) => {
                unsafe { *out = Box::into_raw(Box::new(MixmeasPovm(povm))) };
                MixmeasStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a POVM handle; a null pointer is a no-op.
///
/// # Safety
/// `povm` must have been produced by [`mixmeas_povm_build`] and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn mixmeas_povm_free(povm: *mut MixmeasPovm) {
    if !povm.is_null() {
        drop(unsafe { Box::from_raw(povm) });
    }
}

/// Number of outcomes; 0 for a null handle.
///
/// # Safety
/// `povm` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mixmeas_povm_element_count(povm: *const MixmeasPovm) -> usize {
    unsafe { povm.as_ref() }.map_or(0, |p| p.0.elements().len())
}

/// Max-norm residual of Σ O − I.
///
/// # Safety
/// `povm` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixmeas_povm_identity_residual(
    povm: *const MixmeasPovm,
    out: *mut f64,
) -> MixmeasStatus {
    guarded(|| {
        let (Some(povm), false) = (unsafe { povm.as_ref() }, out.is_null()) else {
            set_error("null pointer argument");
            return MixmeasStatus::NullPointer;
        };
        unsafe { *out = povm.0.identity_residual() };
        MixmeasStatus::Ok
    })
}

/// Serializes the POVM document (optionally with dense matrices) into a
/// newly allocated NUL-terminated JSON string.
///
/// # Safety
/// `povm` must be a live handle and `out` a valid pointer; the returned
/// string must be released with [`mixmeas_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mixmeas_povm_to_json(
    povm: *const MixmeasPovm,
    with_matrices: bool,
    out: *mut *mut c_char,
) -> MixmeasStatus {
    guarded(|| {
        let (Some(povm), false) = (unsafe { povm.as_ref() }, out.is_null()) else {
            set_error("null pointer argument");
            return MixmeasStatus::NullPointer;
        };
        let doc = povm.0.to_document(with_matrices);
        match serde_json::to_string_pretty(&doc) {
            Ok(json) => match CString::new(json) {
                Ok(cstr) => {
                    unsafe { *out = cstr.into_raw() };
                    MixmeasStatus::Ok
                }
                Err(_) => {
                    set_error("serialized JSON contained a NUL byte");
                    MixmeasStatus::ComputeError
                }
            },
            Err(err) => fail(&Error::Json(err)),
        }
    })
}

/// Releases a string returned by this library; a null pointer is a no-op.
///
/// # Safety
/// `s` must have been produced by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mixmeas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
