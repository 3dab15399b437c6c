//! C ABI over the chaos algebra and the Clark reconstruction.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every function returns a [`WlStatus`];
//! on failure [`wienerlab_last_error_message`] describes the error. Strings
//! returned through out-parameters are released with [`wienerlab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wienerlab::chaos::{Ambient, ChaosPoly};
use wienerlab::clark::{reconstruct, ClarkResult};
use wienerlab::dsl::{self, Lowered};
use wienerlab::malliavin::VField;
use wienerlab::Error;

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Dimension = 4,
    DegreeCap = 5,
    InvalidArgument = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque polynomial functional.
pub struct WlPoly(ChaosPoly);

/// Opaque Clark reconstruction.
pub struct WlClark(ClarkResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> WlStatus {
    match e {
        Error::Syntax { .. } | Error::Semantic { .. } | Error::ChaosText { .. } => WlStatus::Parse,
        Error::DimensionMismatch { .. }
        | Error::DimensionCap { .. }
        | Error::IndexOutOfRange { .. }
        | Error::SampleLength { .. } => WlStatus::Dimension,
        Error::DegreeCap { .. } | Error::CapMismatch { .. } => WlStatus::DegreeCap,
        Error::InvalidArgument(_) | Error::Shape(_) | Error::Precondition(_) => WlStatus::InvalidArgument,
        _ => WlStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (WlStatus, String)>>(f: F) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            WlStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            WlStatus::Panic
        }
    }
}

fn lib(e: Error) -> (WlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (WlStatus, String) {
    (WlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (WlStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (WlStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("library text has no nul bytes").into_raw()
}

/// Message for the most recent failure on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn wienerlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn wienerlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scalar expression over `n` coordinates with the given degree cap.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_poly_parse(
    text: *const c_char,
    n: usize,
    degree_cap: u32,
    out: *mut *mut WlPoly,
) -> WlStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text).to_str().map_err(|_| (WlStatus::InvalidUtf8, "text is not UTF-8".into()))?;
        let ambient = Ambient::new(n, degree_cap).map_err(lib)?;
        let p = match dsl::compile(s, ambient).map_err(lib)? {
            Lowered::Scalar(p) => p,
            Lowered::Vector(_) => return Err((WlStatus::InvalidArgument, "expected a scalar expression".into())),
        };
        write_out(out, Box::into_raw(Box::new(WlPoly(p))))
    })
}

/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_poly_free(p: *mut WlPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Canonical text form, one `coeff i:k ...` term per line.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_poly_to_text(p: *const WlPoly, out: *mut *mut c_char) -> WlStatus {
    guard(|| {
        let p = borrow(p, "poly")?;
        write_out(out, into_c_string(p.0.to_text()))
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_poly_expectation(p: *const WlPoly, out: *mut f64) -> WlStatus {
    guard(|| write_out(out, borrow(p, "poly")?.0.expectation()))
}

/// # Safety
/// `p`, `q` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_poly_l2_inner(p: *const WlPoly, q: *const WlPoly, out: *mut f64) -> WlStatus {
    guard(|| {
        let v = borrow(p, "p")?.0.l2_inner(&borrow(q, "q")?.0).map_err(lib)?;
        write_out(out, v)
    })
}

/// Product in the chaos algebra; the result is a new handle.
///
/// # Safety
/// `p`, `q` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_poly_product(p: *const WlPoly, q: *const WlPoly, out: *mut *mut WlPoly) -> WlStatus {
    guard(|| {
        let r = borrow(p, "p")?.0.hermite_product(&borrow(q, "q")?.0).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(WlPoly(r))))
    })
}

/// Pointwise value at a sample of `len` increments.
///
/// # Safety
/// `sample` must point to `len` doubles; `p` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_poly_evaluate(
    p: *const WlPoly,
    sample: *const f64,
    len: usize,
    out: *mut f64,
) -> WlStatus {
    guard(|| {
        let p = borrow(p, "poly")?;
        if sample.is_null() {
            return Err(null("sample"));
        }
        let xs = std::slice::from_raw_parts(sample, len);
        write_out(out, p.0.evaluate(xs).map_err(lib)?)
    })
}

/// Clark reconstruction of a scalar functional.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_clark_reconstruct(p: *const WlPoly, out: *mut *mut WlClark) -> WlStatus {
    guard(|| {
        let v = VField::new(vec![borrow(p, "poly")?.0.clone()]).map_err(lib)?;
        let r = reconstruct(&v).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(WlClark(r))))
    })
}

/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_clark_residual(c: *const WlClark, out: *mut f64) -> WlStatus {
    guard(|| write_out(out, borrow(c, "clark")?.0.residual_l2))
}

/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_clark_to_json(c: *const WlClark, out: *mut *mut c_char) -> WlStatus {
    guard(|| {
        let json = serde_json::to_string(&borrow(c, "clark")?.0.to_json_value()).expect("json");
        write_out(out, into_c_string(json))
    })
}

/// # Safety
/// `c` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wienerlab_clark_free(c: *mut WlClark) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::DegreeCap { degree: 9, cap: 8 }), WlStatus::DegreeCap);
        assert_eq!(status_of(&Error::Semantic { line: 1, column: 1, message: String::new() }), WlStatus::Parse);
        assert_eq!(status_of(&Error::Degenerate(String::new())), WlStatus::Internal);
    }

    #[test]
    fn panics_become_status_codes() {
        assert_eq!(guard(|| panic!("boom")), WlStatus::Panic);
        let msg = unsafe { CStr::from_ptr(wienerlab_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }
}
