//! C ABI for `expochar`.
//!
//! Every fallible function returns an `ExpocharStatus`; results come back
//! through out-pointers. On failure the message is kept per thread and can
//! be read with `expochar_last_error_message`. Distributions are opaque
//! handles created from JSON and released with `expochar_dist_free`.
//! Strings returned by the library must be released with
//! `expochar_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use expochar::cli::{self, ExperimentConfig};
use expochar::contraction;
use expochar::laplace::{Equation, LtFunction};
use expochar::series;
use expochar::{DistSpec, Error};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpocharStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParameterDomain = 3,
    Config = 4,
    NonUnique = 5,
    Numeric = 6,
    DegenerateSample = 7,
    Io = 8,
    Panic = 9,
}

impl From<&Error> for ExpocharStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ParameterDomain(_) | Error::MomentDomain { .. } | Error::OrderMismatch { .. } | Error::Grid(_) => {
                ExpocharStatus::ParameterDomain
            }
            Error::Config(_) | Error::Misuse(_) => ExpocharStatus::Config,
            Error::NonUnique { .. } => ExpocharStatus::NonUnique,
            Error::SingularSeries
            | Error::ContractionFailure { .. }
            | Error::ContractionViolation { .. }
            | Error::Divergence(_)
            | Error::Quadrature { .. } => ExpocharStatus::Numeric,
            Error::DegenerateSample(_) | Error::Binning(_) => ExpocharStatus::DegenerateSample,
            Error::Io(_) => ExpocharStatus::Io,
        }
    }
}

/// Opaque distribution handle.
pub struct ExpocharDist {
    spec: DistSpec,
    lt: LtFunction,
}

/// Derived contraction constants.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExpocharContractionParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_ratio: f64,
    pub b_ratio: f64,
    pub v: f64,
    pub k: u32,
    pub gamma: f64,
    pub rho: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Status(ExpocharStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> ExpocharStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ExpocharStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            ExpocharStatus::from(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            ExpocharStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(ExpocharStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(ExpocharStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn dist_ref<'a>(d: *const ExpocharDist) -> Result<&'a ExpocharDist, Failure> {
    d.as_ref().ok_or_else(|| null("distribution handle"))
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::Status(ExpocharStatus::Io, "output contains a nul byte".into()))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn expochar_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn expochar_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a distribution from JSON such as
/// `{"family":"gamma","params":{"shape":2,"rate":1}}`.
///
/// # Safety
/// `json` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expochar_dist_from_json(json: *const c_char, out: *mut *mut ExpocharDist) -> ExpocharStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let out = out_ref(out, "out")?;
        let spec = DistSpec::from_json(text)?;
        let lt = LtFunction::analytic(spec)?;
        *out = Box::into_raw(Box::new(ExpocharDist { spec, lt }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `dist` must come from `expochar_dist_from_json` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn expochar_dist_free(dist: *mut ExpocharDist) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Whether the handle is an exponential law (1) or not (0).
///
/// # Safety
/// `dist` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expochar_dist_is_exponential(dist: *const ExpocharDist, out: *mut i32) -> ExpocharStatus {
    guard(|| {
        let d = dist_ref(dist)?;
        *out_ref(out, "out")? = i32::from(d.spec.is_exponential());
        Ok(())
    })
}

/// Mean of the distribution.
///
/// # Safety
/// `dist` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expochar_dist_mean(dist: *const ExpocharDist, out: *mut f64) -> ExpocharStatus {
    guard(|| {
        let d = dist_ref(dist)?;
        *out_ref(out, "out")? = d.spec.mean()?;
        Ok(())
    })
}

/// Laplace transform `E exp(-sX)` for `s >= 0`.
///
/// # Safety
/// `dist` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expochar_dist_laplace(dist: *const ExpocharDist, s: f64, out: *mut f64) -> ExpocharStatus {
    guard(|| {
        let d = dist_ref(dist)?;
        *out_ref(out, "out")? = d.lt.eval(s)?;
        Ok(())
    })
}

/// Fills `buf[0..n]` with draws determined by `seed`.
///
/// # Safety
/// `dist` must be a live handle and `buf` valid for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn expochar_dist_sample(dist: *const ExpocharDist, seed: u64, buf: *mut f64, n: usize) -> ExpocharStatus {
    guard(|| {
        let d = dist_ref(dist)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let batch = d.spec.sample(n, seed)?;
        std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&batch.values);
        Ok(())
    })
}

/// Residual of one equation given as JSON, e.g. `{"equation":"diagonal","p":0.5}`.
/// `t` is used only by the bivariate independence equation.
///
/// # Safety
/// `dist` must be a live handle, `equation` a nul-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expochar_residual(
    dist: *const ExpocharDist,
    equation: *const c_char,
    s: f64,
    t: f64,
    out: *mut f64,
) -> ExpocharStatus {
    guard(|| {
        let d = dist_ref(dist)?;
        let eq: Equation = serde_json::from_str(read_str(equation, "equation")?).map_err(|e| Error::Config(e.to_string()))?;
        *out_ref(out, "out")? = eq.residual(&d.lt, s, t)?;
        Ok(())
    })
}

unsafe fn write_coeffs(c: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("coeffs"));
    }
    if len < c.len() {
        return Err(Failure::Status(
            ExpocharStatus::ParameterDomain,
            format!("buffer holds {len} values, need {}", c.len()),
        ));
    }
    std::slice::from_raw_parts_mut(buf, c.len()).copy_from_slice(c);
    Ok(())
}

/// Laplace-transform coefficients `c_0..=c_order` from the geometric
/// compound-sum recursion. `coeffs` must hold `order + 1` values.
///
/// # Safety
/// `coeffs` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn expochar_solve_geometric(
    p: f64,
    q: f64,
    mean: f64,
    order: usize,
    coeffs: *mut f64,
    len: usize,
) -> ExpocharStatus {
    guard(|| {
        let c = series::solve_geometric_recursion(p, q, mean, order)?;
        write_coeffs(c.coeffs(), coeffs, len)
    })
}

/// Coefficients of `1/f` from the regression recursion.
///
/// # Safety
/// `coeffs` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn expochar_solve_regression(
    p: f64,
    mean: f64,
    order: usize,
    coeffs: *mut f64,
    len: usize,
) -> ExpocharStatus {
    guard(|| {
        let c = series::solve_regression_recursion(p, mean, order)?;
        write_coeffs(c.coeffs(), coeffs, len)
    })
}

/// Contraction constants for `(p, a, b)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn expochar_contraction_params(
    p: f64,
    a: f64,
    b: f64,
    out: *mut ExpocharContractionParams,
) -> ExpocharStatus {
    guard(|| {
        let c = contraction::derive_params(p, a, b)?;
        *out_ref(out, "out")? = ExpocharContractionParams {
            p: c.p,
            a: c.a,
            b: c.b,
            c: c.c,
            a_ratio: c.a_ratio,
            b_ratio: c.b_ratio,
            v: c.v,
            k: c.k,
            gamma: c.gamma,
            rho: c.rho,
        };
        Ok(())
    })
}

/// Runs a command described by a config JSON (with a `command` field) and
/// returns the report text, as the command-line tool would print it.
/// `expected` receives 1 when the outcome matches the distribution family.
///
/// # Safety
/// `config` must be a nul-terminated string; `out` and `expected` valid
/// pointers. Release `*out` with `expochar_string_free`.
#[no_mangle]
pub unsafe extern "C" fn expochar_run(config: *const c_char, out: *mut *mut c_char, expected: *mut i32) -> ExpocharStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(read_str(config, "config")?)?;
        if cfg.command.is_none() {
            return Err(Error::Config("config needs a `command`".into()).into());
        }
        let out = out_ref(out, "out")?;
        let expected = out_ref(expected, "expected")?;
        cfg.validate()?;
        let outcome = cli::execute(&cfg)?;
        *expected = i32::from(outcome.expected);
        *out = to_c_string(outcome.text)?;
        Ok(())
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn expochar_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
