// Copyright 2026 Spinforge Contributors
// SPDX-License-Identifier: Apache-2.0

//! C interface to spinforge.
//!
//! Every entry point returns an [`SfStatus`]. On failure a description is
//! available from [`sf_last_error_message`] on the same thread. Handles
//! (`SfConfig`, `SfMatrix`) and strings returned by the library are owned by
//! the caller and released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spinforge::dynamics::{integrate_lab_detailed, IntegrationSettings};
use spinforge::matrix::{phase_fidelity, ComplexMatrix, StateVector, C64};
use spinforge::verify::{all_gates, verify};
use spinforge::{
    build_gate, gate_timing_table, ideal_component, GateSpec, PhysicalConfig, ScheduleMode, ScheduleOptions, SpinError,
    SystemSize,
};

/// Result codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    VerificationFailed = 1,
    Infeasible = 2,
    Error = 3,
    NullPointer = 4,
    InvalidArgument = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfScheduleMode {
    DeriveConstants = 0,
    SharedConstants = 1,
}

/// Phase-insensitive comparison of two operators.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SfFidelityReport {
    pub fidelity: f64,
    pub global_phase_rad: f64,
    pub max_abs_dev: f64,
}

/// Physical constants (opaque).
pub struct SfConfig(PhysicalConfig);

/// Dense complex matrix (opaque).
pub struct SfMatrix(ComplexMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &SpinError) -> SfStatus {
    match err {
        SpinError::Incommensurate(_) | SpinError::Infeasible(_) | SpinError::EmptyConstraints => SfStatus::Infeasible,
        SpinError::InvalidArgument(_) | SpinError::Parse(_) | SpinError::UnknownGate(_) => SfStatus::InvalidArgument,
        _ => SfStatus::Error,
    }
}

enum Failure {
    Status(SfStatus, String),
    Spin(SpinError),
}

impl From<SpinError> for Failure {
    fn from(e: SpinError) -> Self {
        Failure::Spin(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(SfStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<SfStatus, Failure>) -> SfStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Failure::Spin(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(SfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn config<'a>(p: *const SfConfig) -> Result<&'a PhysicalConfig, Failure> {
    p.as_ref().map(|c| &c.0).ok_or_else(|| null("config"))
}

unsafe fn matrix<'a>(p: *const SfMatrix) -> Result<&'a ComplexMatrix, Failure> {
    p.as_ref().map(|m| &m.0).ok_or_else(|| null("matrix"))
}

fn options(mode: SfScheduleMode) -> ScheduleOptions {
    ScheduleOptions {
        mode: match mode {
            SfScheduleMode::DeriveConstants => ScheduleMode::DeriveConstants,
            SfScheduleMode::SharedConstants => ScheduleMode::SharedConstants,
        },
        ..ScheduleOptions::default()
    }
}

unsafe fn emit_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::Status(SfStatus::Error, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| Failure::Status(SfStatus::Error, e.to_string()))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into the library.
#[no_mangle]
pub extern "C" fn sf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Electron constants in SI units, on resonance.
#[no_mangle]
pub extern "C" fn sf_config_new_default() -> *mut SfConfig {
    Box::into_raw(Box::new(SfConfig(PhysicalConfig::default())))
}

/// `gamma = omega = b0 = 1`, other constants zero.
#[no_mangle]
pub extern "C" fn sf_config_new_natural() -> *mut SfConfig {
    Box::into_raw(Box::new(SfConfig(PhysicalConfig::natural_units())))
}

/// Parses a TOML file body with any of `gamma, b0, b1, omega, j, b_prime`.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_config_from_toml(toml: *const c_char, out: *mut *mut SfConfig) -> SfStatus {
    guard(|| {
        let t = text(toml, "toml")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = spinforge::hamiltonian::ConfigLayer::parse(t)?.resolve(PhysicalConfig::natural_units())?;
        *out = Box::into_raw(Box::new(SfConfig(cfg)));
        Ok(SfStatus::Ok)
    })
}

fn field<'a>(cfg: &'a mut PhysicalConfig, key: &str) -> Result<&'a mut f64, Failure> {
    Ok(match key {
        "gamma" => &mut cfg.gamma,
        "b0" => &mut cfg.b0,
        "b1" => &mut cfg.b1,
        "omega" => &mut cfg.omega,
        "j" => &mut cfg.j_coupling,
        "b_prime" => &mut cfg.b_prime,
        other => return Err(Failure::Status(SfStatus::InvalidArgument, format!("unknown key `{other}`"))),
    })
}

/// Sets one constant by name. Resonance is not enforced here.
///
/// # Safety
/// `cfg` must be a live handle and `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sf_config_set(cfg: *mut SfConfig, key: *const c_char, value: f64) -> SfStatus {
    guard(|| {
        let key = text(key, "key")?;
        let cfg = cfg.as_mut().ok_or_else(|| null("config"))?;
        if !value.is_finite() {
            return Err(Failure::Status(SfStatus::InvalidArgument, format!("{key} = {value} is not finite")));
        }
        *field(&mut cfg.0, key)? = value;
        Ok(SfStatus::Ok)
    })
}

/// # Safety
/// `cfg` must be a live handle, `key` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_config_get(cfg: *const SfConfig, key: *const c_char, out: *mut f64) -> SfStatus {
    guard(|| {
        let key = text(key, "key")?;
        let mut c = *config(cfg)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = *field(&mut c, key)?;
        Ok(SfStatus::Ok)
    })
}

/// # Safety
/// `cfg` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_config_free(cfg: *mut SfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Synthesises a gate from pulses. On `SF_OK` or `SF_VERIFICATION_FAILED`
/// `out_matrix` holds the pulse-layer unitary and `out_report` (if non-null)
/// its comparison with the ideal gate.
///
/// # Safety
/// Pointers must be valid; `gate` NUL-terminated; `out_report` may be null.
#[no_mangle]
pub unsafe extern "C" fn sf_build_gate(
    cfg: *const SfConfig,
    gate: *const c_char,
    mode: SfScheduleMode,
    out_matrix: *mut *mut SfMatrix,
    out_report: *mut SfFidelityReport,
) -> SfStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let spec: GateSpec = text(gate, "gate")?.parse()?;
        if out_matrix.is_null() {
            return Err(null("out_matrix"));
        }
        let b = build_gate(&spec, cfg, &options(mode))?;
        if let Some(r) = out_report.as_mut() {
            *r = SfFidelityReport {
                fidelity: b.report.fidelity,
                global_phase_rad: b.report.global_phase_rad,
                max_abs_dev: b.report.max_abs_dev,
            };
        }
        let ok = b.report.is_equivalent(spinforge::verify::FIDELITY_TOL);
        *out_matrix = Box::into_raw(Box::new(SfMatrix(b.unitary)));
        Ok(if ok { SfStatus::Ok } else { SfStatus::VerificationFailed })
    })
}

/// The ideal matrix of a gate.
///
/// # Safety
/// `gate` must be NUL-terminated and `out_matrix` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_ideal_gate(gate: *const c_char, out_matrix: *mut *mut SfMatrix) -> SfStatus {
    guard(|| {
        let spec: GateSpec = text(gate, "gate")?.parse()?;
        if out_matrix.is_null() {
            return Err(null("out_matrix"));
        }
        *out_matrix = Box::into_raw(Box::new(SfMatrix(ideal_component(&spec)?)));
        Ok(SfStatus::Ok)
    })
}

/// # Safety
/// Both handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_phase_fidelity(
    built: *const SfMatrix,
    target: *const SfMatrix,
    out: *mut SfFidelityReport,
) -> SfStatus {
    guard(|| {
        let (a, b) = (matrix(built)?, matrix(target)?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = phase_fidelity(a, b)?;
        *out = SfFidelityReport {
            fidelity: r.fidelity,
            global_phase_rad: r.global_phase_rad,
            max_abs_dev: r.max_abs_dev,
        };
        Ok(SfStatus::Ok)
    })
}

/// Timing table of a gate as JSON. Free the string with `sf_string_free`.
///
/// # Safety
/// Pointers must be valid; `gate` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sf_schedule_json(
    cfg: *const SfConfig,
    gate: *const c_char,
    mode: SfScheduleMode,
    out_json: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let spec: GateSpec = text(gate, "gate")?.parse()?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let table = gate_timing_table(&spec, cfg, &options(mode))?;
        emit_string(json(&table)?, out_json)?;
        Ok(SfStatus::Ok)
    })
}

/// Runs the verification checks for `scope` (`"all"` or a gate name) and
/// writes the report as JSON. Returns `SF_VERIFICATION_FAILED` when any
/// check fails; the report is written either way.
///
/// # Safety
/// Pointers must be valid; `scope` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sf_verify_json(
    cfg: *const SfConfig,
    scope: *const c_char,
    oracle: bool,
    out_json: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let scope = text(scope, "scope")?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let (gates, dynamics) = if scope == "all" {
            (all_gates(), true)
        } else {
            (vec![scope.parse::<GateSpec>()?], false)
        };
        let report = verify(&gates, cfg, &ScheduleOptions::default(), oracle, dynamics)?;
        emit_string(json(&report)?, out_json)?;
        Ok(if report.passed { SfStatus::Ok } else { SfStatus::VerificationFailed })
    })
}

/// Integrates the lab-frame equation for `n` spins from the state given by
/// `re`/`im` (length `2^n`) to `t_final`, overwriting the buffers with the
/// final state. `dt <= 0` picks a step automatically.
///
/// # Safety
/// `re` and `im` must each point to `2^n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_simulate(
    cfg: *const SfConfig,
    n: usize,
    re: *mut f64,
    im: *mut f64,
    t_final: f64,
    dt: f64,
) -> SfStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let size = SystemSize::new(n)?;
        if re.is_null() || im.is_null() {
            return Err(null("state buffer"));
        }
        let dim = size.dim();
        let (re, im) = (std::slice::from_raw_parts_mut(re, dim), std::slice::from_raw_parts_mut(im, dim));
        let psi = StateVector::new(re.iter().zip(im.iter()).map(|(&a, &b)| C64::new(a, b)).collect())?;
        let settings = if dt > 0.0 {
            IntegrationSettings::new(dt)
        } else {
            IntegrationSettings::auto(cfg, size, t_final)
        };
        let run = integrate_lab_detailed(cfg, size, &psi, t_final, &settings, None)?;
        for (k, z) in run.state.amplitudes().iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(SfStatus::Ok)
    })
}

/// Matrix dimension, 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_dim(m: *const SfMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// # Safety
/// `m` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_get(
    m: *const SfMatrix,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> SfStatus {
    guard(|| {
        let m = matrix(m)?;
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        if row >= m.dim() || col >= m.dim() {
            return Err(Failure::Status(
                SfStatus::InvalidArgument,
                format!("entry ({row}, {col}) outside a {0}x{0} matrix", m.dim()),
            ));
        }
        let z = m.get(row, col);
        *re = z.re;
        *im = z.im;
        Ok(SfStatus::Ok)
    })
}

/// # Safety
/// `m` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_to_json(m: *const SfMatrix, out_json: *mut *mut c_char) -> SfStatus {
    guard(|| {
        let m = matrix(m)?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        emit_string(json(m)?, out_json)?;
        Ok(SfStatus::Ok)
    })
}

/// # Safety
/// `m` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sf_matrix_free(m: *mut SfMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
