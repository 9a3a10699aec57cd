//! C ABI over `supcert`.
//!
//! Objects are opaque handles created by `supcert_*_new`/`parse` calls and
//! released by the matching `*_free`. Every fallible call returns a
//! `SupcertStatus`; the message of the last failure on the calling thread is
//! available from `supcert_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use supcert::asymptotics::{fit_growth_with, flatness_exponent_with, AsymptoticProfile, FitConfig};
use supcert::format::{parse_sum_file, FileLoader};
use supcert::oracle::brute_sup;
use supcert::supremum::{witness_set, WitnessCertificate};
use supcert::termalg::PreparedSum;
use supcert::{Error, Options};

/// Status codes; values match the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupcertStatus {
    Ok = 0,
    /// Parse, data or I/O error.
    Data = 1,
    /// A certification hypothesis failed.
    Hypothesis = 2,
    NullPointer = 5,
    InvalidUtf8 = 6,
    InvalidArgument = 7,
    OutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupcertDirection {
    X = 0,
    Eps = 1,
}

/// Knobs for certification; see `supcert_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SupcertOptions {
    pub trials: u32,
    pub budget: u32,
    pub seed: u64,
}

/// Opaque prepared sum.
pub struct SupcertSum {
    inner: PreparedSum,
}

/// Opaque witness certificate.
pub struct SupcertCertificate {
    inner: WitnessCertificate,
}

/// Opaque growth profile.
pub struct SupcertProfile {
    inner: AsymptoticProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> SupcertStatus {
    if e.is_hypothesis_failure() {
        SupcertStatus::Hypothesis
    } else if matches!(
        e,
        Error::InvalidArgument(_) | Error::Grid(_) | Error::Empty | Error::Negative(_)
    ) {
        SupcertStatus::InvalidArgument
    } else {
        SupcertStatus::Data
    }
}

fn guard<F: FnOnce() -> Result<(), (SupcertStatus, String)>>(f: F) -> SupcertStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SupcertStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SupcertStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SupcertStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SupcertStatus, String) {
    (SupcertStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SupcertStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SupcertStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn to_options(o: Option<&SupcertOptions>) -> Options {
    match o {
        Some(o) => Options {
            trials: o.trials as usize,
            budget: o.budget as usize,
            seed: o.seed,
        },
        None => Options::default(),
    }
}

/// Message of the last failed call on this thread; empty if none. Owned by the library.
#[no_mangle]
pub extern "C" fn supcert_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn supcert_options_default() -> SupcertOptions {
    let o = Options::default();
    SupcertOptions {
        trials: o.trials as u32,
        budget: o.budget as u32,
        seed: o.seed,
    }
}

/// Parses sum-file text; table paths resolve against `base_dir` (may be NULL for the working directory).
///
/// # Safety
/// `text` and a non-NULL `base_dir` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_sum_parse(
    text: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut SupcertSum,
) -> SupcertStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let base = if base_dir.is_null() {
            ""
        } else {
            str_arg(base_dir, "base_dir")?
        };
        let file = parse_sum_file(text, &FileLoader::new(base)).map_err(lib_err)?;
        let inner = file.to_prepared().map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SupcertSum { inner }));
        Ok(())
    })
}

/// # Safety
/// `sum` must come from `supcert_sum_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn supcert_sum_free(sum: *mut SupcertSum) {
    if !sum.is_null() {
        drop(Box::from_raw(sum));
    }
}

/// Evaluates `|h(y)|`.
///
/// # Safety
/// `sum` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_sum_abs(sum: *const SupcertSum, y: f64, out: *mut f64) -> SupcertStatus {
    guard(|| {
        let (Some(s), false) = (sum.as_ref(), out.is_null()) else {
            return Err(null("sum or out"));
        };
        *out = s.inner.abs_at(y).map_err(lib_err)?;
        Ok(())
    })
}

/// Builds the witness certificate; `opts` may be NULL for defaults.
///
/// # Safety
/// `sum` must be a live handle, `opts` NULL or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_certify(
    sum: *const SupcertSum,
    opts: *const SupcertOptions,
    out: *mut *mut SupcertCertificate,
) -> SupcertStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let s = sum.as_ref().ok_or_else(|| null("sum"))?;
        let inner = witness_set(&s.inner, &to_options(opts.as_ref())).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SupcertCertificate { inner }));
        Ok(())
    })
}

/// # Safety
/// `cert` must come from `supcert_certify` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn supcert_certificate_free(cert: *mut SupcertCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Score `max` over the witness entries; NaN for a NULL handle.
///
/// # Safety
/// `cert` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn supcert_certificate_score(cert: *const SupcertCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.inner.score)
}

/// Two-sided constant; NaN for a NULL handle.
///
/// # Safety
/// `cert` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn supcert_certificate_c_total(cert: *const SupcertCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.inner.c_total)
}

/// # Safety
/// `cert` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn supcert_certificate_witness_count(cert: *const SupcertCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.inner.witnesses.len())
}

/// Witness `index`: its point and `|h|` there.
///
/// # Safety
/// `cert` must be a live handle; `y` and `h_abs` writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_certificate_witness(
    cert: *const SupcertCertificate,
    index: usize,
    y: *mut f64,
    h_abs: *mut f64,
) -> SupcertStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("cert"))?;
        if y.is_null() || h_abs.is_null() {
            return Err(null("y or h_abs"));
        }
        let w = c.inner.witnesses.get(index).ok_or_else(|| {
            (
                SupcertStatus::OutOfRange,
                format!("witness {index} of {}", c.inner.witnesses.len()),
            )
        })?;
        *y = w.y;
        *h_abs = w.h_abs;
        Ok(())
    })
}

/// JSON form of the certificate; release with `supcert_string_free`.
///
/// # Safety
/// `cert` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_certificate_json(
    cert: *const SupcertCertificate,
    out: *mut *mut c_char,
) -> SupcertStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let c = cert.as_ref().ok_or_else(|| null("cert"))?;
        let s = serde_json::to_string(&c.inner).map_err(|e| (SupcertStatus::Data, e.to_string()))?;
        *out = CString::new(s)
            .map_err(|e| (SupcertStatus::Data, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn supcert_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Brute-force `sup |h|` over `(lo, hi)` with `budget` grid points.
///
/// # Safety
/// `sum` must be a live handle; `sup` and `argmax` writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_oracle_sup(
    sum: *const SupcertSum,
    lo: f64,
    hi: f64,
    budget: u32,
    sup: *mut f64,
    argmax: *mut f64,
) -> SupcertStatus {
    guard(|| {
        let s = sum.as_ref().ok_or_else(|| null("sum"))?;
        if sup.is_null() || argmax.is_null() {
            return Err(null("sup or argmax"));
        }
        let r = brute_sup(&s.inner, lo, hi, budget as usize).map_err(lib_err)?;
        *sup = r.sup_estimate;
        *argmax = r.argmax;
        Ok(())
    })
}

/// Fits `c x^r (log x)^l` (or `c eps^r |log eps|^l`) to `n` samples.
///
/// # Safety
/// `x` and `v` must point to `n` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_fit_growth(
    x: *const f64,
    v: *const f64,
    n: usize,
    direction: SupcertDirection,
    max_l: u32,
    out: *mut *mut SupcertProfile,
) -> SupcertStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if x.is_null() || v.is_null() {
            return Err(null("x or v"));
        }
        let xs = std::slice::from_raw_parts(x, n);
        let vs = std::slice::from_raw_parts(v, n);
        let samples: Vec<(f64, f64)> = xs.iter().copied().zip(vs.iter().copied()).collect();
        let cfg = FitConfig {
            max_l,
            ..FitConfig::default()
        };
        let inner = match direction {
            SupcertDirection::X => fit_growth_with(&samples, &cfg),
            SupcertDirection::Eps => flatness_exponent_with(&samples, &cfg),
        }
        .map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SupcertProfile { inner }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `supcert_fit_growth` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn supcert_profile_free(p: *mut SupcertProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Exponent and log power. `num`/`den` receive the exact exponent when one was
/// found (otherwise `den` is 0); `r` always receives the float value.
///
/// # Safety
/// `p` must be a live handle; all out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_profile_exponent(
    p: *const SupcertProfile,
    r: *mut f64,
    num: *mut i64,
    den: *mut i64,
    l: *mut u32,
) -> SupcertStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("profile"))?;
        if r.is_null() || num.is_null() || den.is_null() || l.is_null() {
            return Err(null("out-pointer"));
        }
        *r = p.inner.r;
        let (a, b) = p.inner.r_exact.map_or((0, 0), |q| (*q.numer(), *q.denom()));
        *num = a;
        *den = b;
        *l = p.inner.l;
        Ok(())
    })
}

/// Constant band `[lo, hi]`.
///
/// # Safety
/// `p` must be a live handle; `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn supcert_profile_band(p: *const SupcertProfile, lo: *mut f64, hi: *mut f64) -> SupcertStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("profile"))?;
        if lo.is_null() || hi.is_null() {
            return Err(null("lo or hi"));
        }
        (*lo, *hi) = p.inner.c_band;
        Ok(())
    })
}

/// 1 when the samples do not follow any `c x^r (log x)^l` model, 0 otherwise (also for NULL).
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn supcert_profile_non_power_log(p: *const SupcertProfile) -> i32 {
    p.as_ref().map_or(0, |p| i32::from(p.inner.non_power_log()))
}
