//! C ABI over `cavgate`.
//!
//! Handles are opaque and owned by the caller once returned; free each with
//! its `*_free` function. Every fallible call returns a [`CgStatus`] and, on
//! failure, leaves a message for [`cg_last_error`] on the calling thread.
//! Strings returned through `char **` are freed with [`cg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cavgate::cluster::{generate_cluster, CavityInit, QubitState, Tier};
use cavgate::gates::{solve_schedule, GateSchedule, T1Mode};
use cavgate::model::ParamsFile;
use cavgate::open_system::{feasibility_report, NoiseParams};
use cavgate::units::Dimension;
use cavgate::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Truncation = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgTier {
    Ideal = 0,
    ClosedForm = 1,
    LambDicke = 2,
    LabFrame = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgT1Mode {
    Paper = 0,
    Corrected = 1,
}

/// Model parameters; unresolved until used, so overrides can be applied in any order.
pub struct CgParams {
    file: ParamsFile,
}

pub struct CgSchedule {
    inner: GateSchedule,
}

/// Final register state as a density matrix.
pub struct CgState {
    num_qubits: usize,
    /// Row-major `dim × dim`, interleaved re/im.
    density: Vec<f64>,
}

/// Plain numbers of a solved schedule. Times in ns, rates in rad/ns.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgScheduleValues {
    pub num_qubits: usize,
    pub gamma: f64,
    pub delta: f64,
    pub period: f64,
    pub t1: f64,
    pub e_phi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CgStatus {
    match e {
        Error::Truncation { .. } => CgStatus::Truncation,
        e if e.is_numerical() => CgStatus::Numerical,
        _ => CgStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into a status.
fn guarded<F: FnOnce() -> Result<(), (CgStatus, String)>>(f: F) -> CgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside cavgate".into());
            CgStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (CgStatus, String)>;
}

impl<T> IntoFfi<T> for cavgate::Result<T> {
    fn ffi(self) -> Result<T, (CgStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (CgStatus, String) {
    (CgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CgStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (CgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CgStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<*mut T, (CgStatus, String)> {
    if p.is_null() {
        Err(null(what))
    } else {
        Ok(p)
    }
}

fn c_string(s: String) -> Result<*mut c_char, (CgStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (CgStatus::InvalidArgument, "string contains a nul byte".into()))
}

/// Library version, a static string. Do not free.
#[no_mangle]
pub extern "C" fn cg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread. Do not free.
#[no_mangle]
pub extern "C" fn cg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default parameters.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cg_params_default(out: *mut *mut CgParams) -> CgStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(CgParams { file: ParamsFile::default() }));
        Ok(())
    })
}

/// Parameters from a JSON document in the parameter-file schema.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cg_params_from_json(json: *const c_char, out: *mut *mut CgParams) -> CgStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(json, "json")?;
        let file = ParamsFile::from_json(text).ffi()?;
        file.to_system().ffi()?;
        *out = Box::into_raw(Box::new(CgParams { file }));
        Ok(())
    })
}

/// Sets one parameter, e.g. `("g", "0.005")` or `("E_J", "40ueV")`.
///
/// # Safety
/// `params` must come from this library; `key` and `value` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn cg_params_set(params: *mut CgParams, key: *const c_char, value: *const c_char) -> CgStatus {
    guarded(|| {
        let p = params.as_mut().ok_or_else(|| null("params"))?;
        let (k, v) = (str_arg(key, "key")?, str_arg(value, "value")?);
        let mut next = p.file.clone();
        next.set(k, v).ffi()?;
        next.to_system().ffi()?;
        p.file = next;
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cg_params_free(params: *mut CgParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Solves the gate schedule for the qubit count and loop indices in `params`.
///
/// # Safety
/// `params` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cg_schedule_solve(params: *const CgParams, mode: CgT1Mode, out: *mut *mut CgSchedule) -> CgStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let p = ref_arg(params, "params")?;
        let sp = p.file.to_system().ffi()?;
        let (k, n) = p.file.loop_indices();
        let mode = match mode {
            CgT1Mode::Paper => T1Mode::Paper,
            CgT1Mode::Corrected => T1Mode::Corrected,
        };
        let inner = solve_schedule(&sp, sp.num_qubits, k, n, mode).ffi()?;
        *out = Box::into_raw(Box::new(CgSchedule { inner }));
        Ok(())
    })
}

/// # Safety
/// `schedule` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cg_schedule_values(schedule: *const CgSchedule, out: *mut CgScheduleValues) -> CgStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let s = &ref_arg(schedule, "schedule")?.inner;
        *out = CgScheduleValues {
            num_qubits: s.num_qubits,
            gamma: s.gamma,
            delta: s.delta,
            period: s.period,
            t1: s.t1,
            e_phi: s.e_phi,
        };
        Ok(())
    })
}

/// Schedule as JSON with explicit units. Free with [`cg_string_free`].
///
/// # Safety
/// `schedule` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cg_schedule_json(schedule: *const CgSchedule, out: *mut *mut c_char) -> CgStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let s = ref_arg(schedule, "schedule")?;
        let text = serde_json::to_string(&s.inner.to_json()).map_err(|e| (CgStatus::InvalidArgument, e.to_string()))?;
        *out = c_string(text)?;
        Ok(())
    })
}

/// # Safety
/// `schedule` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cg_schedule_free(schedule: *mut CgSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// Generates the cluster state with the cavity starting in Fock level `fock`.
/// `fidelity` may be null.
///
/// # Safety
/// Handles must be live; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cg_generate_cluster(
    params: *const CgParams,
    schedule: *const CgSchedule,
    tier: CgTier,
    fock: usize,
    out: *mut *mut CgState,
    fidelity: *mut f64,
) -> CgStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let p = ref_arg(params, "params")?;
        let s = &ref_arg(schedule, "schedule")?.inner;
        let sp = p.file.to_system().ffi()?;
        let tier = match tier {
            CgTier::Ideal => Tier::Ideal,
            CgTier::ClosedForm => Tier::ClosedForm,
            CgTier::LambDicke => Tier::LambDicke,
            CgTier::LabFrame => Tier::LabFrame,
        };
        let o = generate_cluster(&sp, s, tier, CavityInit::Fock(fock)).ffi()?;
        let rho = match &o.state {
            QubitState::Pure(v) => v.to_density(),
            QubitState::Mixed(r) => r.clone(),
        };
        let density = rho.matrix().transpose().iter().flat_map(|z| [z.re, z.im]).collect();
        if !fidelity.is_null() {
            *fidelity = o.fidelity;
        }
        *out = Box::into_raw(Box::new(CgState { num_qubits: s.num_qubits, density }));
        Ok(())
    })
}

/// Register dimension `2^N` of a state.
///
/// # Safety
/// `state` must be a live handle; `dim` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cg_state_dim(state: *const CgState, dim: *mut usize) -> CgStatus {
    guarded(|| {
        let dim = out_arg(dim, "dim")?;
        *dim = 1usize << ref_arg(state, "state")?.num_qubits;
        Ok(())
    })
}

/// Copies the density matrix, row-major with interleaved re/im, into `buf`
/// of `len` doubles; `len` must be at least `2 dim²`.
///
/// # Safety
/// `state` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cg_state_density(state: *const CgState, buf: *mut f64, len: usize) -> CgStatus {
    guarded(|| {
        let s = ref_arg(state, "state")?;
        let buf = out_arg(buf, "buf")?;
        if len < s.density.len() {
            return Err((
                CgStatus::BufferTooSmall,
                format!("buffer holds {len} doubles, {} needed", s.density.len()),
            ));
        }
        ptr::copy_nonoverlapping(s.density.as_ptr(), buf, s.density.len());
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cg_state_free(state: *mut CgState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Feasibility report as JSON. Ω and the qubit lifetime come from the
/// `Omega` and `gamma_q` parameters (defaults 0.015 rad/ns and 2000 ns).
///
/// # Safety
/// `params` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cg_feasibility_json(params: *const CgParams, out: *mut *mut c_char) -> CgStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let p = ref_arg(params, "params")?;
        let sp = p.file.to_system().ffi()?;
        let noise = NoiseParams::from_file(&p.file, sp.cavity.omega_c).ffi()?;
        let omega = p.file.vacuum_rabi.as_ref().map_or(Ok(0.015), |q| q.canonical(Dimension::Frequency)).ffi()?;
        let gamma_q = p.file.gamma_q.as_ref().map_or(Ok(2000.0), |q| q.canonical(Dimension::Time)).ffi()?;
        let (k, n) = p.file.loop_indices();
        let r = feasibility_report(&sp, &noise, omega, gamma_q, k, n).ffi()?;
        let text = serde_json::to_string(&r).map_err(|e| (CgStatus::InvalidArgument, e.to_string()))?;
        *out = c_string(text)?;
        Ok(())
    })
}
