//! C interface to the qumvqd solver.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`QvStatus`] and leaves a message for [`qv_last_error_message`] on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qumvqd::electronic::{compression_report, FermionicHamiltonian};
use qumvqd::fock::eigenvalues;
use qumvqd::fragments::{reconstruct_hamiltonian, FragmentSet};
use qumvqd::noise::{fidelity_energy_error, GateFidelityModel};
use qumvqd::runner::{electronic_problem, pair_levels};
use qumvqd::vqd::{run_vqd, AnsatzSpec, DenseBackend, EnergyBackend, FragmentBackend, VqdConfig, VqdResult};
use qumvqd::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Numerical = 4,
    Capacity = 5,
    SymmetryViolation = 6,
    Truncation = 7,
    InputInconsistency = 8,
    Convergence = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for QvStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Argument(_) => QvStatus::InvalidArgument,
            Error::Numerical(_) => QvStatus::Numerical,
            Error::Capacity(_) => QvStatus::Capacity,
            Error::InputInconsistency(_) => QvStatus::InputInconsistency,
            Error::SymmetryViolation { .. } => QvStatus::SymmetryViolation,
            Error::Truncation(_) => QvStatus::Truncation,
            Error::Parse { .. } => QvStatus::Parse,
            Error::Convergence(_) => QvStatus::Convergence,
            Error::Io { .. } => QvStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(QvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(QvStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QvStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, turning errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QvStatus::Ok
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
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            QvStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|e| Failure(QvStatus::InvalidArgument, format!("{what} is not UTF-8: {e}")))
}

/// Copy `src` into a caller buffer. `needed` receives the size including
/// the terminating NUL either way.
unsafe fn write_str(src: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Failure> {
    let n = src.len() + 1;
    if !needed.is_null() {
        // SAFETY: non-null out pointer supplied by the caller.
        unsafe { *needed = n };
    }
    if buf.is_null() || len < n {
        return Err(Failure(QvStatus::BufferTooSmall, format!("buffer holds {len} bytes, {n} needed")));
    }
    // SAFETY: `buf` has room for `n` bytes as checked above.
    unsafe {
        ptr::copy_nonoverlapping(src.as_ptr(), buf as *mut u8, src.len());
        *buf.add(src.len()) = 0;
    }
    Ok(())
}

enum Problem {
    Dense(DenseBackend),
    Fragments(FragmentBackend),
}

/// A Hamiltonian ready for the solver, with its exact spectrum.
pub struct QvHamiltonian {
    problem: Problem,
    oracle: Vec<f64>,
}

impl QvHamiltonian {
    fn backend(&self) -> &dyn EnergyBackend {
        match &self.problem {
            Problem::Dense(b) => b,
            Problem::Fragments(b) => b,
        }
    }
}

/// Deflation result plus the oracle it is compared against.
pub struct QvResult {
    result: VqdResult,
    oracle: Vec<f64>,
    json: String,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QvCompressionReport {
    pub m: u32,
    pub n_e: u32,
    /// `2^M`, exact below `2^53`.
    pub full_dim: f64,
    pub restricted_dim: f64,
    pub ratio: f64,
    pub qumodes_full: u32,
    pub qumodes_restricted: u32,
}

/// Version string, static storage.
#[no_mangle]
pub extern "C" fn qv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failed call on this thread, NUL-terminated.
///
/// # Safety
/// `buf` must point to `len` writable bytes or be null; `needed` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qv_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> QvStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    // not routed through guard: that would clear the message
    match unsafe { write_str(&msg, buf, len, needed) } {
        Ok(()) => QvStatus::Ok,
        Err(Failure(s, _)) => s,
    }
}

/// Build the particle-number sector of a fermionic Hamiltonian given as
/// JSON text and place it on qumodes of cutoff `cutoff`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qv_hamiltonian_from_electronic_json(
    json: *const c_char,
    n_e: usize,
    cutoff: usize,
    out: *mut *mut QvHamiltonian,
) -> QvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { read_str(json, "json") }?;
        let h = FermionicHamiltonian::from_json_str(text, "json")?;
        let p = electronic_problem(&h, n_e, cutoff)?;
        let handle = QvHamiltonian {
            problem: Problem::Dense(DenseBackend::new(p.register)),
            oracle: p.oracle,
        };
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(handle)) };
        Ok(())
    })
}

/// Load a vibrational fragment set from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qv_hamiltonian_from_fragments_json(json: *const c_char, out: *mut *mut QvHamiltonian) -> QvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { read_str(json, "json") }?;
        let fs = FragmentSet::from_json_str(text, "json")?;
        let oracle = eigenvalues(&reconstruct_hamiltonian(&fs)?);
        let handle = QvHamiltonian {
            problem: Problem::Fragments(FragmentBackend::new(&fs)?),
            oracle,
        };
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(handle)) };
        Ok(())
    })
}

/// Register dimension the solver works in.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qv_hamiltonian_dimension(h: *const QvHamiltonian, out: *mut usize) -> QvStatus {
    guard(|| {
        let h = unsafe { h.as_ref() }.ok_or_else(|| null("h"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        unsafe { *out = h.backend().space().total_dim() };
        Ok(())
    })
}

/// Lowest `len` exact eigenvalues of the physical Hamiltonian, ascending.
/// `written` receives how many were stored.
///
/// # Safety
/// `values` must hold `len` doubles; `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qv_hamiltonian_eigenvalues(
    h: *const QvHamiltonian,
    values: *mut f64,
    len: usize,
    written: *mut usize,
) -> QvStatus {
    guard(|| {
        let h = unsafe { h.as_ref() }.ok_or_else(|| null("h"))?;
        if values.is_null() && len > 0 {
            return Err(null("values"));
        }
        let n = len.min(h.oracle.len());
        if n > 0 {
            // SAFETY: caller provides room for `len >= n` values.
            unsafe { ptr::copy_nonoverlapping(h.oracle.as_ptr(), values, n) };
        }
        if !written.is_null() {
            unsafe { *written = n };
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qv_hamiltonian_free(h: *mut QvHamiltonian) {
    if !h.is_null() {
        // SAFETY: handle came from Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Run deflation with a JSON run configuration (`depth`, `k`, `betas`,
/// `seed`, `optimizer`, ...).
///
/// # Safety
/// `h` must be a live handle, `config_json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qv_run_vqd(h: *const QvHamiltonian, config_json: *const c_char, out: *mut *mut QvResult) -> QvStatus {
    guard(|| {
        let h = unsafe { h.as_ref() }.ok_or_else(|| null("h"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = VqdConfig::from_json_str(unsafe { read_str(config_json, "config_json") }?, "config_json")?;
        if cfg.k > h.oracle.len() {
            return Err(Error::Argument(format!("k = {} exceeds the physical dimension {}", cfg.k, h.oracle.len())).into());
        }
        let ansatz = AnsatzSpec::new(*h.backend().space(), cfg.depth);
        let result = run_vqd(&ansatz, h.backend(), cfg.k, &cfg.betas.expand(cfg.k)?, &cfg.optimizer, cfg.seed)?;
        let levels = pair_levels(&result.energies(), &h.oracle, cfg.merge_tol.unwrap_or(1e-6))?;
        let json = serde_json::json!({ "result": &result, "levels": levels }).to_string();
        let r = QvResult {
            result,
            oracle: h.oracle.clone(),
            json,
        };
        unsafe { *out = Box::into_raw(Box::new(r)) };
        Ok(())
    })
}

/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qv_result_num_states(r: *const QvResult, out: *mut usize) -> QvStatus {
    guard(|| {
        let r = unsafe { r.as_ref() }.ok_or_else(|| null("r"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        unsafe { *out = r.result.states.len() };
        Ok(())
    })
}

/// Energies ascending, with the matching exact eigenvalues in `oracle`
/// when it is non-null. Both buffers hold `len` doubles.
///
/// # Safety
/// `r` must be a live handle; buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qv_result_energies(r: *const QvResult, energies: *mut f64, oracle: *mut f64, len: usize) -> QvStatus {
    guard(|| {
        let r = unsafe { r.as_ref() }.ok_or_else(|| null("r"))?;
        let k = r.result.states.len();
        if len < k {
            return Err(Failure(QvStatus::BufferTooSmall, format!("buffer holds {len} values, {k} needed")));
        }
        if energies.is_null() {
            return Err(null("energies"));
        }
        for (i, s) in r.result.states.iter().enumerate() {
            unsafe { *energies.add(i) = s.energy };
            if !oracle.is_null() {
                unsafe { *oracle.add(i) = r.oracle[i] };
            }
        }
        Ok(())
    })
}

/// 1 when every state stopped on a convergence test, 0 otherwise.
///
/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qv_result_converged(r: *const QvResult, out: *mut i32) -> QvStatus {
    guard(|| {
        let r = unsafe { r.as_ref() }.ok_or_else(|| null("r"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        unsafe { *out = r.result.all_converged() as i32 };
        Ok(())
    })
}

/// Full result as JSON. Call with a null buffer to learn the size.
///
/// # Safety
/// `r` must be a live handle; `buf` must hold `len` bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn qv_result_to_json(r: *const QvResult, buf: *mut c_char, len: usize, needed: *mut usize) -> QvStatus {
    guard(|| {
        let r = unsafe { r.as_ref() }.ok_or_else(|| null("r"))?;
        unsafe { write_str(&r.json, buf, len, needed) }
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qv_result_free(r: *mut QvResult) {
    if !r.is_null() {
        drop(unsafe { Box::from_raw(r) });
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qv_compression_report(m: u32, n_e: u32, d: u64, out: *mut QvCompressionReport) -> QvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = compression_report(m, n_e, d)?;
        unsafe {
            *out = QvCompressionReport {
                m: r.m,
                n_e: r.n_e,
                full_dim: r.full_dim as f64,
                restricted_dim: r.restricted_dim as f64,
                ratio: r.ratio,
                qumodes_full: r.qumodes_full,
                qumodes_restricted: r.qumodes_restricted,
            }
        };
        Ok(())
    })
}

/// `(1 - (1 - p)^n) |reference|`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qv_fidelity_energy_error(p: f64, n: u64, reference: f64, out: *mut f64) -> QvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = GateFidelityModel::new(p, n, reference)?;
        unsafe { *out = fidelity_energy_error(&m) };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message() -> String {
        LAST_ERROR.with(|e| e.borrow().clone())
    }

    #[test]
    fn panics_become_a_status() {
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let s = guard(|| panic!("boom"));
        std::panic::set_hook(prev);
        assert_eq!(s, QvStatus::Panic);
        assert_eq!(message(), "panic: boom");
        assert_eq!(guard(|| Ok(())), QvStatus::Ok);
        assert_eq!(message(), "");
    }

    #[test]
    fn errors_keep_their_message() {
        let s = guard(|| Err(Error::Argument("bad k".into()).into()));
        assert_eq!(s, QvStatus::InvalidArgument);
        assert!(message().contains("bad k"));
    }

    #[test]
    fn strings_are_nul_terminated() {
        let mut needed = 0;
        let mut buf = [1 as c_char; 4];
        assert!(unsafe { write_str("abcd", buf.as_mut_ptr(), buf.len(), &mut needed) }.is_err());
        assert_eq!(needed, 5);
        unsafe { write_str("abc", buf.as_mut_ptr(), buf.len(), &mut needed) }.ok().unwrap();
        assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "abc");
    }
}
