//! C ABI for `w2clt`.
//!
//! Distributions live behind the opaque `W2cltDist` handle. Every fallible
//! function returns a [`W2cltStatus`] and writes its result through an out
//! pointer; on failure `w2clt_last_error` describes what went wrong on the
//! calling thread. Handles are released with `w2clt_dist_free`, strings with
//! `w2clt_string_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use w2clt::renormalization::{contraction_check, rg_trace};
use w2clt::transport::{w2_discrete, w2_to_gaussian};
use w2clt::{gaussian, DiscreteDist, Error, ErrorKind};

/// Opaque distribution handle.
pub struct W2cltDist(DiscreteDist);

/// Status codes; the nonzero input, domain and capacity codes match the
/// exit codes of the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum W2cltStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Capacity = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct W2cltMoments {
    pub mean: f64,
    pub variance: f64,
    pub fourth_moment: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct W2cltReport {
    pub distance: f64,
    pub squared_distance: f64,
    pub error_bound: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct W2cltContraction {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(W2cltStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Input => W2cltStatus::InvalidInput,
            ErrorKind::Domain => W2cltStatus::Domain,
            ErrorKind::Capacity => W2cltStatus::Capacity,
            ErrorKind::Io => W2cltStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(W2cltStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> W2cltStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => W2cltStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            W2cltStatus::Panic
        }
    }
}

unsafe fn dist<'a>(p: *const W2cltDist, what: &str) -> Result<&'a DiscreteDist, Failure> {
    p.as_ref().map(|d| &d.0).ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_dist(out: *mut *mut W2cltDist, d: DiscreteDist) -> Result<(), Failure> {
    put(out, Box::into_raw(Box::new(W2cltDist(d))), "out")
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(W2cltStatus::Io, "string holds a nul byte".into()))?;
    put(out, c.into_raw(), "out")
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn w2clt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a distribution from `len` positions and weights.
///
/// # Safety
/// `positions` and `weights` must point to `len` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_new(
    positions: *const f64,
    weights: *const f64,
    len: usize,
    out: *mut *mut W2cltDist,
) -> W2cltStatus {
    guard(|| {
        if len > 0 && (positions.is_null() || weights.is_null()) {
            return Err(null("positions or weights"));
        }
        let (xs, ws) = if len == 0 {
            (&[][..], &[][..])
        } else {
            (
                std::slice::from_raw_parts(positions, len),
                std::slice::from_raw_parts(weights, len),
            )
        };
        let d = DiscreteDist::new(xs.iter().copied().zip(ws.iter().copied()))?;
        put_dist(out, d)
    })
}

/// Parses `{"atoms": [[position, weight], ...]}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_from_json(json: *const c_char, out: *mut *mut W2cltDist) -> W2cltStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure(W2cltStatus::InvalidInput, "json is not UTF-8".into()))?;
        put_dist(out, DiscreteDist::from_json(text)?)
    })
}

/// Serializes to JSON; release the string with `w2clt_string_free`.
///
/// # Safety
/// `d` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_to_json(d: *const W2cltDist, out: *mut *mut c_char) -> W2cltStatus {
    guard(|| put_string(out, dist(d, "d")?.to_json()))
}

/// # Safety
/// `d` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_free(d: *mut W2cltDist) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn w2clt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_len(d: *const W2cltDist, out: *mut usize) -> W2cltStatus {
    guard(|| put(out, dist(d, "d")?.len(), "out"))
}

/// Copies the atoms into caller buffers of `capacity` entries; fails with
/// `InvalidInput` when `capacity` is smaller than the atom count.
///
/// # Safety
/// `positions` and `weights` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_atoms(
    d: *const W2cltDist,
    positions: *mut f64,
    weights: *mut f64,
    capacity: usize,
) -> W2cltStatus {
    guard(|| {
        let d = dist(d, "d")?;
        if capacity < d.len() {
            return Err(Failure(
                W2cltStatus::InvalidInput,
                format!("capacity {capacity} is below the atom count {}", d.len()),
            ));
        }
        if positions.is_null() || weights.is_null() {
            return Err(null("positions or weights"));
        }
        for (i, a) in d.atoms().iter().enumerate() {
            positions.add(i).write(a.position);
            weights.add(i).write(a.weight);
        }
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_cdf(d: *const W2cltDist, x: f64, out: *mut f64) -> W2cltStatus {
    guard(|| put(out, dist(d, "d")?.cdf(x), "out"))
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_quantile(d: *const W2cltDist, t: f64, out: *mut f64) -> W2cltStatus {
    guard(|| put(out, dist(d, "d")?.quantile(t)?, "out"))
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_moments(d: *const W2cltDist, out: *mut W2cltMoments) -> W2cltStatus {
    guard(|| {
        let m = dist(d, "d")?.moments();
        put(
            out,
            W2cltMoments {
                mean: m.mean,
                variance: m.variance,
                fourth_moment: m.fourth_moment,
            },
            "out",
        )
    })
}

/// Law of `a + b` for independent summands.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_convolve(
    a: *const W2cltDist,
    b: *const W2cltDist,
    out: *mut *mut W2cltDist,
) -> W2cltStatus {
    guard(|| put_dist(out, dist(a, "a")?.convolve(dist(b, "b")?)?))
}

/// Law of `(a + b) / sqrt 2` for independent summands.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_normalized_sum(
    a: *const W2cltDist,
    b: *const W2cltDist,
    out: *mut *mut W2cltDist,
) -> W2cltStatus {
    guard(|| put_dist(out, dist(a, "a")?.normalized_sum(dist(b, "b")?)?))
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_quantize(
    d: *const W2cltDist,
    bins: usize,
    out: *mut *mut W2cltDist,
) -> W2cltStatus {
    guard(|| put_dist(out, dist(d, "d")?.quantize(bins)?))
}

/// Law of `scale * X + shift`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_affine(
    d: *const W2cltDist,
    scale: f64,
    shift: f64,
    out: *mut *mut W2cltDist,
) -> W2cltStatus {
    guard(|| put_dist(out, dist(d, "d")?.affine(scale, shift)?))
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_dist_standardize(
    d: *const W2cltDist,
    out: *mut *mut W2cltDist,
) -> W2cltStatus {
    guard(|| put_dist(out, dist(d, "d")?.standardize()?))
}

fn report(r: w2clt::W2Report) -> W2cltReport {
    W2cltReport {
        distance: r.distance,
        squared_distance: r.squared_distance,
        error_bound: r.error_bound,
    }
}

/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_w2_discrete(
    a: *const W2cltDist,
    b: *const W2cltDist,
    out: *mut W2cltReport,
) -> W2cltStatus {
    guard(|| put(out, report(w2_discrete(dist(a, "a")?, dist(b, "b")?)), "out"))
}

/// Distance to the standard normal law.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_w2_to_gaussian(d: *const W2cltDist, out: *mut W2cltReport) -> W2cltStatus {
    guard(|| put(out, report(w2_to_gaussian(dist(d, "d")?)), "out"))
}

/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_contraction_check(
    a: *const W2cltDist,
    b: *const W2cltDist,
    out: *mut W2cltContraction,
) -> W2cltStatus {
    guard(|| {
        let c = contraction_check(dist(a, "a")?, dist(b, "b")?)?;
        put(
            out,
            W2cltContraction {
                lhs: c.lhs,
                rhs: c.rhs,
                margin: c.margin,
            },
            "out",
        )
    })
}

/// Renormalization trace as CSV text; release with `w2clt_string_free`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_rg_trace_csv(
    d: *const W2cltDist,
    iterations: usize,
    max_support: usize,
    out: *mut *mut c_char,
) -> W2cltStatus {
    guard(|| {
        let trace = rg_trace(dist(d, "d")?, iterations, max_support)?;
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        put_string(out, String::from_utf8(buf).expect("csv output is UTF-8"))
    })
}

#[no_mangle]
pub extern "C" fn w2clt_gaussian_cdf(z: f64) -> f64 {
    gaussian::cdf(z)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2clt_gaussian_quantile(t: f64, out: *mut f64) -> W2cltStatus {
    guard(|| put(out, gaussian::quantile(t)?, "out"))
}
