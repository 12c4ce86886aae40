//! C ABI over the pulse-compilation pipeline: gate-library management,
//! circuit scheduling, schedule verification and exact execution.
//!
//! Conventions:
//! - Handles (`DqdcLibrary`, `DqdcSchedule`) are opaque; free them with the
//!   matching `*_free` function exactly once.
//! - Every fallible call returns a [`DqdcStatus`]; on failure,
//!   [`dqdc_last_error_message`] returns a malloc'd description for the
//!   calling thread (free it with [`dqdc_string_free`]).
//! - Strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use libc::{c_char, c_double, c_longlong, c_ulonglong, size_t};

use dqdc::error::Error;
use dqdc::executor::{execute, measure_distribution};
use dqdc::library::{compile_standard, CompileOptions, GateLibrary};
use dqdc::linalg::StateVector;
use dqdc::scheduler::{schedule, verify_schedule, CircuitIR, Schedule};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DqdcStatus {
    Ok = 0,
    /// Bad argument: null pointer, malformed string, shape mismatch.
    InvalidArgument = 1,
    /// A hardware constraint or validity invariant was violated.
    ConstraintViolation = 2,
    /// Gate training did not reach the admission threshold.
    NonConvergence = 3,
    IoError = 4,
    /// File or JSON contents do not match the expected schema.
    ParseError = 5,
    /// A named gate is missing from the library.
    NotFound = 6,
    InternalError = 7,
}

/// Opaque gate-library handle.
pub struct DqdcLibrary {
    inner: GateLibrary,
}

/// Opaque schedule handle.
pub struct DqdcSchedule {
    inner: Schedule,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DqdcStatus {
    match e {
        Error::ShapeMismatch(_) | Error::Validation(_) | Error::Capacity(_) => {
            DqdcStatus::InvalidArgument
        }
        Error::Constraint(_) | Error::UnitarityBroken(_) => DqdcStatus::ConstraintViolation,
        Error::CompilationFailed { .. } => DqdcStatus::NonConvergence,
        Error::GateNotFound(_) => DqdcStatus::NotFound,
        Error::FileFormat(_) | Error::Serde(_) => DqdcStatus::ParseError,
        Error::Io(_) => DqdcStatus::IoError,
    }
}

fn fail(e: Error) -> DqdcStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn guard(body: impl FnOnce() -> DqdcStatus) -> DqdcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            DqdcStatus::InternalError
        }
    }
}

/// # Safety
/// `ptr` must be NUL-terminated and valid for reads.
unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, DqdcStatus> {
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(DqdcStatus::InvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        DqdcStatus::InvalidArgument
    })
}

macro_rules! deref {
    ($ptr:expr, $what:literal) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_error(concat!($what, " handle is null").to_string());
                return DqdcStatus::InvalidArgument;
            }
        }
    };
}

/// Last error message of the calling thread, or NULL if none. The caller
/// owns the returned string and must release it with [`dqdc_string_free`].
#[no_mangle]
pub extern "C" fn dqdc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by [`dqdc_last_error_message`]
/// (or NULL) and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dqdc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library format version understood by this build.
#[no_mangle]
pub extern "C" fn dqdc_format_version() -> u32 {
    dqdc::library::FORMAT_VERSION
}

/// Creates an empty gate library.
#[no_mangle]
pub extern "C" fn dqdc_library_new() -> *mut DqdcLibrary {
    Box::into_raw(Box::new(DqdcLibrary { inner: GateLibrary::new() }))
}

/// Loads a gate library from a JSON file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dqdc_library_load(
    path: *const c_char,
    out: *mut *mut DqdcLibrary,
) -> DqdcStatus {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is null".to_string());
            return DqdcStatus::InvalidArgument;
        }
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match GateLibrary::load(Path::new(path)) {
            Ok(lib) => {
                *out = Box::into_raw(Box::new(DqdcLibrary { inner: lib }));
                DqdcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Saves a gate library to a JSON file (atomic write).
///
/// # Safety
/// `lib` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dqdc_library_save(
    lib: *const DqdcLibrary,
    path: *const c_char,
) -> DqdcStatus {
    guard(|| {
        let lib = deref!(lib, "library");
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match lib.inner.save(Path::new(path)) {
            Ok(()) => DqdcStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Trains one standard gate (H, T, S, X, Y, Z, CX, CX_10, CZ) and inserts it
/// into the library. Pass `lr <= 0` and `max_rounds <= 0` to use the
/// per-gate defaults.
///
/// # Safety
/// `lib` must be a live handle and `name` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dqdc_library_compile_standard(
    lib: *mut DqdcLibrary,
    name: *const c_char,
    lr: c_double,
    max_rounds: c_longlong,
    seed: c_ulonglong,
) -> DqdcStatus {
    guard(|| {
        let lib = match unsafe { lib.as_mut() } {
            Some(r) => r,
            None => {
                set_error("library handle is null".to_string());
                return DqdcStatus::InvalidArgument;
            }
        };
        let name = match read_str(name, "gate name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        let opts = CompileOptions {
            learning_rate: (lr > 0.0).then_some(lr),
            max_rounds: (max_rounds > 0).then_some(max_rounds as usize),
            seed: Some(seed),
            error_threshold: None,
        };
        match compile_standard(name, &opts).and_then(|gate| lib.inner.insert(gate)) {
            Ok(()) => DqdcStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Number of gates in the library.
///
/// # Safety
/// `lib` must be a live handle (NULL yields 0).
#[no_mangle]
pub unsafe extern "C" fn dqdc_library_len(lib: *const DqdcLibrary) -> size_t {
    unsafe { lib.as_ref() }.map_or(0, |l| l.inner.len())
}

/// Whether the library holds a gate with this name.
///
/// # Safety
/// `lib` must be a live handle and `name` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dqdc_library_contains(
    lib: *const DqdcLibrary,
    name: *const c_char,
) -> bool {
    let Some(lib) = (unsafe { lib.as_ref() }) else {
        return false;
    };
    if name.is_null() {
        return false;
    }
    match unsafe { CStr::from_ptr(name) }.to_str() {
        Ok(n) => lib.inner.contains(n),
        Err(_) => false,
    }
}

/// Releases a library handle.
///
/// # Safety
/// `lib` must come from this ABI and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dqdc_library_free(lib: *mut DqdcLibrary) {
    if !lib.is_null() {
        drop(Box::from_raw(lib));
    }
}

/// Lays out a circuit (JSON text, same schema as the `.json` circuit files)
/// into a pulse schedule using the given library.
///
/// # Safety
/// `lib` must be a live handle, `ir_json` a valid NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dqdc_schedule_compile(
    lib: *const DqdcLibrary,
    ir_json: *const c_char,
    out: *mut *mut DqdcSchedule,
) -> DqdcStatus {
    guard(|| {
        let lib = deref!(lib, "library");
        if out.is_null() {
            set_error("out pointer is null".to_string());
            return DqdcStatus::InvalidArgument;
        }
        let text = match read_str(ir_json, "circuit JSON") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let ir: CircuitIR = match serde_json::from_str(text) {
            Ok(ir) => ir,
            Err(e) => return fail(Error::FileFormat(format!("circuit schema violation: {e}"))),
        };
        match schedule(&ir, &lib.inner) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(DqdcSchedule { inner: s }));
                DqdcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads a schedule from a JSON file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dqdc_schedule_load(
    path: *const c_char,
    out: *mut *mut DqdcSchedule,
) -> DqdcStatus {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is null".to_string());
            return DqdcStatus::InvalidArgument;
        }
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Schedule::load(Path::new(path)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(DqdcSchedule { inner: s }));
                DqdcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Saves a schedule to a JSON file (atomic write).
///
/// # Safety
/// `s` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dqdc_schedule_save(
    s: *const DqdcSchedule,
    path: *const c_char,
) -> DqdcStatus {
    guard(|| {
        let s = deref!(s, "schedule");
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(st) => return st,
        };
        match s.inner.save(Path::new(path)) {
            Ok(()) => DqdcStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Chain length of a schedule (0 for NULL).
///
/// # Safety
/// `s` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dqdc_schedule_n_qubits(s: *const DqdcSchedule) -> size_t {
    unsafe { s.as_ref() }.map_or(0, |s| s.inner.n_qubits)
}

/// Total schedule duration (NaN for NULL).
///
/// # Safety
/// `s` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dqdc_schedule_makespan(s: *const DqdcSchedule) -> c_double {
    unsafe { s.as_ref() }.map_or(f64::NAN, |s| s.inner.makespan)
}

/// Audits the schedule constraints. Returns `Ok` when every check passes;
/// otherwise `ConstraintViolation` with the failing checks in the error
/// message.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dqdc_schedule_verify(s: *const DqdcSchedule) -> DqdcStatus {
    guard(|| {
        let s = deref!(s, "schedule");
        let report = verify_schedule(&s.inner);
        if report.passed() {
            DqdcStatus::Ok
        } else {
            let failures: Vec<String> = report
                .items
                .iter()
                .filter(|i| !i.passed)
                .map(|i| format!("{}: {}", i.name, i.detail))
                .collect();
            set_error(failures.join("; "));
            DqdcStatus::ConstraintViolation
        }
    })
}

/// Executes the schedule from a computational basis state and writes the
/// 2^n outcome probabilities into `out_probs` (which must hold `out_len >=
/// 2^n` doubles). `init_bits` may be NULL for the all-zeros state.
///
/// # Safety
/// `s` must be a live handle, `init_bits` NULL or a valid NUL-terminated
/// string, and `out_probs` valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn dqdc_schedule_execute(
    s: *const DqdcSchedule,
    init_bits: *const c_char,
    out_probs: *mut c_double,
    out_len: size_t,
) -> DqdcStatus {
    guard(|| {
        let s = deref!(s, "schedule");
        let n = s.inner.n_qubits;
        let dim = 1usize << n;
        if out_probs.is_null() || out_len < dim {
            set_error(format!("output buffer must hold at least {dim} doubles"));
            return DqdcStatus::InvalidArgument;
        }
        let init = if init_bits.is_null() {
            StateVector::zero_state(n)
        } else {
            let bits = match read_str(init_bits, "initial state") {
                Ok(b) => b,
                Err(st) => return st,
            };
            if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
                set_error(format!("initial state must be a {n}-character bitstring"));
                return DqdcStatus::InvalidArgument;
            }
            StateVector::basis(n, usize::from_str_radix(bits, 2).expect("validated"))
        };
        match execute(&s.inner, &init) {
            Ok(result) => {
                let probs = measure_distribution(&result.final_state);
                let out = std::slice::from_raw_parts_mut(out_probs, dim);
                out.copy_from_slice(&probs);
                DqdcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a schedule handle.
///
/// # Safety
/// `s` must come from this ABI and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dqdc_schedule_free(s: *mut DqdcSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
