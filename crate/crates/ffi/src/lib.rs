//! C ABI over `pcfi`.
//!
//! Objects cross the boundary as opaque handles created from JSON text and
//! released with the matching `_free` function. Every call returns a
//! [`PcfiStatus`]; on failure [`pcfi_last_error`] describes the cause for
//! the calling thread. Strings handed out by the library are released with
//! [`pcfi_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pcfi::coherence::{coherence_search, coherence_two_qubit, coherence_unitary_bound, SearchConfig, UnitaryBoundMode};
use pcfi::estimation::{channel_fi, qfi_family};
use pcfi::io::{self, CoherenceResultJson};
use pcfi::lincore::Tolerances;
use pcfi::resource::TOL_COMPLETENESS;
use pcfi::{DensityMatrix, Error, PioChannel};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcfiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Domain = 5,
    Panic = 6,
}

/// Exact two-qubit value when `dim_a == 2`, heuristic search otherwise.
pub const PCFI_MODE_AUTO: u32 = 0;
pub const PCFI_MODE_TWO_QUBIT: u32 = 1;
pub const PCFI_MODE_SEARCH: u32 = 2;

/// Opaque bipartite density matrix.
pub struct PcfiDensity(DensityMatrix);

/// Opaque phase-parametrized channel.
pub struct PcfiChannel(PioChannel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(PcfiStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => PcfiStatus::Parse,
            e if e.is_domain_error() => PcfiStatus::Domain,
            _ => PcfiStatus::Validation,
        };
        Failure(status, format!("{}: {e}", e.kind()))
    }
}

fn null(what: &str) -> Failure {
    Failure(PcfiStatus::NullPointer, format!("null pointer: {what}"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PcfiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PcfiStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            PcfiStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(PcfiStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Parses a density matrix from JSON with default tolerances.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcfi_density_from_json(json: *const c_char, out: *mut *mut PcfiDensity) -> PcfiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let rho = io::density_from_json(text, &Tolerances::default())?;
        write(out, Box::into_raw(Box::new(PcfiDensity(rho))), "out")
    })
}

/// # Safety
/// `p` must come from [`pcfi_density_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pcfi_density_free(p: *mut PcfiDensity) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Parses and validates a channel from JSON (1-based targets).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcfi_channel_from_json(json: *const c_char, out: *mut *mut PcfiChannel) -> PcfiStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let ch = io::channel_from_json(text, TOL_COMPLETENESS)?;
        write(out, Box::into_raw(Box::new(PcfiChannel(ch))), "out")
    })
}

/// # Safety
/// `p` must come from [`pcfi_channel_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pcfi_channel_free(p: *mut PcfiChannel) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Classical Fisher information of the post-selected outcomes at `eps0`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcfi_classical_fi(
    channel: *const PcfiChannel,
    state: *const PcfiDensity,
    eps0: f64,
    out: *mut f64,
) -> PcfiStatus {
    guard(|| {
        let (ch, rho) = (deref(channel, "channel")?, deref(state, "state")?);
        let v = channel_fi(&ch.0, &rho.0, eps0)?;
        write(out, v, "out")
    })
}

/// Quantum Fisher information of the reduced family produced by the channel.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcfi_qfi_family(
    channel: *const PcfiChannel,
    state: *const PcfiDensity,
    eps0: f64,
    out: *mut f64,
) -> PcfiStatus {
    guard(|| {
        let (ch, rho) = (deref(channel, "channel")?, deref(state, "state")?);
        let v = qfi_family(&ch.0, &rho.0, eps0)?;
        write(out, v, "out")
    })
}

/// Unitary-generator bound. `index == 0` searches every binary generator;
/// `index >= 1` fixes the generator to the projector on that (1-based) level.
///
/// # Safety
/// `state` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcfi_unitary_bound(state: *const PcfiDensity, index: usize, out: *mut f64) -> PcfiStatus {
    guard(|| {
        let rho = deref(state, "state")?;
        let mode = match index {
            0 => UnitaryBoundMode::Full,
            i => UnitaryBoundMode::FixedIndex(i - 1),
        };
        let v = coherence_unitary_bound(&rho.0, mode)?;
        write(out, v, "out")
    })
}

/// Coherence value. When `out_json` is non-null it receives the full result
/// (value, mode, certificate channel) as JSON, to be released with
/// [`pcfi_string_free`]. The search uses default settings with `seed`.
///
/// # Safety
/// `state` must be live; `out_value` must be writable; `out_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn pcfi_coherence(
    state: *const PcfiDensity,
    mode: u32,
    seed: u64,
    out_value: *mut f64,
    out_json: *mut *mut c_char,
) -> PcfiStatus {
    guard(|| {
        let rho = deref(state, "state")?;
        if out_value.is_null() {
            return Err(null("out_value"));
        }
        let cfg = SearchConfig {
            seed,
            ..SearchConfig::default()
        };
        let result = match mode {
            PCFI_MODE_TWO_QUBIT => coherence_two_qubit(&rho.0)?,
            PCFI_MODE_AUTO if rho.0.dim_a() == 2 => coherence_two_qubit(&rho.0)?,
            PCFI_MODE_AUTO | PCFI_MODE_SEARCH => coherence_search(&rho.0, &cfg)?,
            other => {
                return Err(Failure(PcfiStatus::Validation, format!("argument: unknown mode {other}")));
            }
        };
        if !out_json.is_null() {
            let text = io::to_json(&CoherenceResultJson::from(&result));
            let c = CString::new(text).expect("json has no nul bytes");
            out_json.write(c.into_raw());
        }
        out_value.write(result.value);
        Ok(())
    })
}

/// Optimal success probability for a two-state ensemble given as JSON.
///
/// # Safety
/// `ensemble_json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pcfi_helstrom(ensemble_json: *const c_char, out: *mut f64) -> PcfiStatus {
    guard(|| {
        let text = read_str(ensemble_json, "ensemble_json")?;
        let ens = io::ensemble_from_json(text)?;
        let v = pcfi::qsd::helstrom(&ens)?;
        write(out, v, "out")
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn pcfi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn pcfi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn pcfi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
