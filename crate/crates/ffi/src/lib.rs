//! C ABI over `gammaseq`.
//!
//! Every fallible function returns a [`GsStatus`]; on failure a message is
//! available from [`gs_last_error`] on the same thread. Strings returned
//! through `char **` are owned by the caller and released with
//! [`gs_string_free`]; polynomial handles with [`gs_polynomial_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gammaseq::harness::{parse_with_path, run, validate_polynomial, DecompositionJson, PolynomialJson, Suite, TensorJson};
use gammaseq::norm::{spectral_norm_strings, Engine, NormOptions};
use gammaseq::poisson::bracket;
use gammaseq::site::build_basis;
use gammaseq::symbolic::{decompose, quantize_strings, GammaPolynomial, LocalTensor};
use gammaseq::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a schema violation.
    Parse = 3,
    /// Well-formed input outside the supported domain.
    InvalidInput = 4,
    /// A size guard (dense limit, site or factor cap) was hit.
    Resource = 5,
    /// The eigensolver failed or did not converge.
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

/// Selects the norm engine in [`gs_quantize_norm`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsEngine {
    Auto = 0,
    Dense = 1,
    Implicit = 2,
}

/// Opaque γ-polynomial.
pub struct GsPolynomial {
    inner: GammaPolynomial,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::Json(_) | Error::Config { .. } => GsStatus::Parse,
        Error::DenseLimit { .. } | Error::TooManySites { .. } | Error::TooManyFactors { .. } | Error::BracketTooLarge { .. } => {
            GsStatus::Resource
        }
        Error::NoConvergence { .. } | Error::Eigensolver(_) => GsStatus::Numerical,
        Error::Io(_) => GsStatus::Io,
        _ => GsStatus::InvalidInput,
    }
}

struct Failure(GsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            GsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(GsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn poly<'a>(p: *const GsPolynomial, what: &str) -> Result<&'a GammaPolynomial, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null(what))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(GsStatus::InvalidInput, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_poly(out: *mut *mut GsPolynomial, p: GammaPolynomial) {
    *out = Box::into_raw(Box::new(GsPolynomial { inner: p }));
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a polynomial in the JSON schema. Word factors may be general tensors.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_polynomial_from_json(json: *const c_char, out: *mut *mut GsPolynomial) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let parsed: PolynomialJson = parse_with_path(read_str(json, "json")?)?;
        put_poly(out, GammaPolynomial::try_from(&parsed)?);
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_polynomial_free(p: *mut GsPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_polynomial_to_json(p: *const GsPolynomial, out: *mut *mut c_char) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let json = serde_json::to_string(&PolynomialJson::from(poly(p, "p")?)).map_err(Error::from)?;
        put_string(out, json)
    })
}

/// # Safety
/// `s` must come from this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The commutative product `a·b`.
///
/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_polynomial_mul(
    a: *const GsPolynomial,
    b: *const GsPolynomial,
    out: *mut *mut GsPolynomial,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put_poly(out, poly(a, "a")?.mul(poly(b, "b")?));
        Ok(())
    })
}

/// The Poisson bracket `{a, b}` for site dimension `kappa`.
///
/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_polynomial_bracket(
    a: *const GsPolynomial,
    b: *const GsPolynomial,
    kappa: u32,
    out: *mut *mut GsPolynomial,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let basis = build_basis(kappa as usize)?;
        let (a, b) = (poly(a, "a")?, poly(b, "b")?);
        validate_polynomial(a, &basis)?;
        validate_polynomial(b, &basis)?;
        put_poly(out, bracket(a, b, &basis)?);
        Ok(())
    })
}

/// `‖Q_N(p)‖` on `sites` sites.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_quantize_norm(
    p: *const GsPolynomial,
    kappa: u32,
    sites: u32,
    engine: GsEngine,
    seed: u64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let basis = build_basis(kappa as usize)?;
        let p = poly(p, "p")?;
        validate_polynomial(p, &basis)?;
        let engine = match engine {
            GsEngine::Auto => Engine::Auto,
            GsEngine::Dense => Engine::Dense,
            GsEngine::Implicit => Engine::Implicit,
        };
        let opts = NormOptions::default().with_engine(engine).with_seed(seed);
        *out = spectral_norm_strings(&quantize_strings(p, sites as usize)?, &basis, &opts)?;
        Ok(())
    })
}

/// Canonical components of a tensor given as JSON, returned as JSON.
///
/// # Safety
/// `tensor_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_decompose_json(tensor_json: *const c_char, out: *mut *mut c_char) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t: TensorJson = parse_with_path(read_str(tensor_json, "tensor_json")?)?;
        let d = decompose(&LocalTensor::try_from(&t)?);
        put_string(out, serde_json::to_string(&DecompositionJson::from(&d)).map_err(Error::from)?)
    })
}

/// Runs an experiment config (or suite), writing any configured artifacts.
/// The report is returned as JSON and `exit_code` is 0 iff every assertion held.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `report_out` and `exit_code`
/// valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gs_run_config_json(
    config_json: *const c_char,
    report_out: *mut *mut c_char,
    exit_code: *mut i32,
) -> GsStatus {
    guard(|| {
        if report_out.is_null() || exit_code.is_null() {
            return Err(null("output pointer"));
        }
        let suite = Suite::parse(read_str(config_json, "config_json")?)?;
        let report = run(&suite)?;
        *exit_code = report.exit_code();
        put_string(report_out, serde_json::to_string(&report).map_err(Error::from)?)
    })
}
