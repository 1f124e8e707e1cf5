//! C interface to `qchain`. Objects cross the boundary as opaque handles that the
//! caller releases with the matching `_free` function. Every entry point returns
//! one of the `QCHAIN_*` status codes; the message for the most recent failure on
//! the calling thread is available from `qchain_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qchain::ensembles::{sample, EnsembleSpec, Family, SampledHamiltonian};
use qchain::spectra::Spectrum;
use qchain::{entanglement, free_fermion, hciz, spectra, Error};

pub const QCHAIN_OK: i32 = 0;
pub const QCHAIN_NULL_POINTER: i32 = 1;
pub const QCHAIN_INVALID_ARGUMENT: i32 = 2;
pub const QCHAIN_DENSE_BUDGET: i32 = 3;
pub const QCHAIN_UNSUPPORTED: i32 = 4;
pub const QCHAIN_NUMERICAL: i32 = 5;
pub const QCHAIN_BUFFER_TOO_SMALL: i32 = 6;
pub const QCHAIN_PANIC: i32 = 7;

/// A sampled Hamiltonian.
pub struct QchainHamiltonian(SampledHamiltonian);

/// Ascending eigenvalues of a Hamiltonian.
pub struct QchainSpectrum(Spectrum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::SiteOutOfRange { .. } | Error::SizeMismatch(..) => QCHAIN_INVALID_ARGUMENT,
        Error::DenseBudget { .. } => QCHAIN_DENSE_BUDGET,
        Error::Unsupported(_) => QCHAIN_UNSUPPORTED,
        _ => QCHAIN_NUMERICAL,
    }
}

struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(code_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QCHAIN_NULL_POINTER, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QCHAIN_OK,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside qchain".into());
            QCHAIN_PANIC
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_scalar<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output"));
    }
    *out = v;
    Ok(())
}

/// Message for the last failure on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn qchain_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qchain_status_name(code: i32) -> *const c_char {
    let s: &'static CStr = match code {
        QCHAIN_OK => c"ok",
        QCHAIN_NULL_POINTER => c"null pointer",
        QCHAIN_INVALID_ARGUMENT => c"invalid argument",
        QCHAIN_DENSE_BUDGET => c"dense budget exceeded",
        QCHAIN_UNSUPPORTED => c"unsupported",
        QCHAIN_NUMERICAL => c"numerical failure",
        QCHAIN_BUFFER_TOO_SMALL => c"buffer too small",
        QCHAIN_PANIC => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Draws sample `index` of the named family (`generic`, `local`, `inv-local`, ...).
///
/// # Safety
/// `family` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qchain_hamiltonian_sample(
    family: *const c_char,
    n: usize,
    seed: u64,
    index: u64,
    out: *mut *mut QchainHamiltonian,
) -> i32 {
    guard(|| {
        if family.is_null() {
            return Err(null("family"));
        }
        let name = CStr::from_ptr(family)
            .to_str()
            .map_err(|_| Fail(QCHAIN_INVALID_ARGUMENT, "family is not UTF-8".into()))?;
        let family: Family = name.parse()?;
        let h = sample(&EnsembleSpec::new(family, n, seed), index)?;
        store(out, QchainHamiltonian(h))
    })
}

/// # Safety
/// `h` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn qchain_hamiltonian_free(h: *mut QchainHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qchain_hamiltonian_qubits(h: *const QchainHamiltonian, out: *mut usize) -> i32 {
    guard(|| write_scalar(out, deref(h, "hamiltonian")?.0.n))
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qchain_hamiltonian_term_count(h: *const QchainHamiltonian, out: *mut usize) -> i32 {
    guard(|| write_scalar(out, deref(h, "hamiltonian")?.0.terms.len()))
}

/// Full spectrum by dense diagonalisation.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qchain_hamiltonian_spectrum(h: *const QchainHamiltonian, out: *mut *mut QchainSpectrum) -> i32 {
    guard(|| {
        let s = spectra::spectrum_of(&deref(h, "hamiltonian")?.0)?;
        store(out, QchainSpectrum(s))
    })
}

/// Spectrum of a Hamiltonian made of nearest-neighbour fermion bilinears.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qchain_hamiltonian_jw_spectrum(h: *const QchainHamiltonian, out: *mut *mut QchainSpectrum) -> i32 {
    guard(|| {
        let s = free_fermion::jw_spectrum(&deref(h, "hamiltonian")?.0)?;
        store(out, QchainSpectrum(s))
    })
}

/// Sets `passed` to 1 when every eigenvector has a maximally mixed single-qubit
/// state (within `tol`), 0 otherwise. `applicable` is 0 when the spectrum is degenerate
/// or local terms are present, and `passed` is then 0 as well.
///
/// # Safety
/// `h` must be a live handle; `applicable` and `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qchain_hamiltonian_single_qubit_check(
    h: *const QchainHamiltonian,
    tol: f64,
    applicable: *mut i32,
    passed: *mut i32,
) -> i32 {
    guard(|| {
        let r = entanglement::check_single_qubit_theorem(&deref(h, "hamiltonian")?.0, tol)?;
        write_scalar(applicable, r.applicable as i32)?;
        write_scalar(passed, r.passed as i32)
    })
}

/// # Safety
/// `s` must come from this library and not have been freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn qchain_spectrum_free(s: *mut QchainSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qchain_spectrum_len(s: *const QchainSpectrum, out: *mut usize) -> i32 {
    guard(|| write_scalar(out, deref(s, "spectrum")?.0.values.len()))
}

/// Copies the eigenvalues into `buf`. Fails with `QCHAIN_BUFFER_TOO_SMALL` if `len` is short.
///
/// # Safety
/// `s` must be a live handle and `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qchain_spectrum_copy(s: *const QchainSpectrum, buf: *mut f64, len: usize) -> i32 {
    guard(|| {
        let v = &deref(s, "spectrum")?.0.values;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len < v.len() {
            return Err(Fail(QCHAIN_BUFFER_TOO_SMALL, format!("need {} entries, got {len}", v.len())));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// One-eigenvalue marginal of the conjectured two-qubit eigenvalue density.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qchain_hciz_one_point(lambda: f64, out: *mut f64) -> i32 {
    guard(|| write_scalar(out, hciz::one_point_value(lambda)?))
}

/// Average purity of `l`-site blocks over the joint translation and field eigenbasis.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qchain_translation_basis_purity(n: usize, l: usize, out: *mut f64) -> i32 {
    guard(|| write_scalar(out, free_fermion::translation_basis_purity(n, l)?))
}
