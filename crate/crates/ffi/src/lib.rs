//! C ABI over `qcrb-core`.
//!
//! Every function returns a [`QcrbStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be copied out
//! with [`qcrb_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qcrb_core::estimators::{run_experiment, EstimatorKind, ExperimentConfig, SensitivityReport};
use qcrb_core::qcrb::{bound_report, competitor_sensitivities, qfi_check, qfi_single_mode, CutoffPolicy};
use qcrb_core::{physics, Error, SourceSpec};

/// Status codes; 2–4 match the exit codes of the `qcrb` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcrbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Numerical = 3,
    Invariant = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QcrbStatus {
    match e.exit_code() {
        3 => QcrbStatus::Numerical,
        4 => QcrbStatus::Invariant,
        _ => QcrbStatus::InvalidInput,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QcrbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcrbStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            QcrbStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            QcrbStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` is null or valid for writes.
unsafe fn write<T>(ptr: *mut T, what: &'static str, value: T) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    ptr.write(value);
    Ok(())
}

/// # Safety
/// `ptr` is null or points to a live handle.
unsafe fn handle<'a>(ptr: *const QcrbSourceSpec) -> Result<&'a SourceSpec, Failure> {
    ptr.as_ref().map(|h| &h.0).ok_or(Failure::Null("spec"))
}

/// Opaque source description.
pub struct QcrbSourceSpec(SourceSpec);

/// Copies the last error of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, or 0 when
/// there is no error.
///
/// # Safety
/// `buf` is null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn qcrb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qcrb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` is null or valid for writes. The handle must be released with
/// [`qcrb_source_spec_free`].
#[no_mangle]
pub unsafe extern "C" fn qcrb_source_spec_from_occupation(
    n0: f64,
    nu0: f64,
    delta_nu: f64,
    t_obs: f64,
    out: *mut *mut QcrbSourceSpec,
) -> QcrbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let spec = SourceSpec::from_occupation(n0, nu0, delta_nu, t_obs)?;
        write(out, "out", Box::into_raw(Box::new(QcrbSourceSpec(spec))))
    })
}

/// # Safety
/// As [`qcrb_source_spec_from_occupation`].
#[no_mangle]
pub unsafe extern "C" fn qcrb_source_spec_from_temperature(
    t_s: f64,
    nu0: f64,
    delta_nu: f64,
    t_obs: f64,
    out: *mut *mut QcrbSourceSpec,
) -> QcrbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let spec = SourceSpec::from_temperature(t_s, nu0, delta_nu, t_obs)?;
        write(out, "out", Box::into_raw(Box::new(QcrbSourceSpec(spec))))
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `spec` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcrb_source_spec_free(spec: *mut QcrbSourceSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Occupation, time-bandwidth product and mode count of a source.
///
/// # Safety
/// `spec` is a live handle; out pointers are null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcrb_source_spec_summary(
    spec: *const QcrbSourceSpec,
    n0: *mut f64,
    time_bandwidth: *mut f64,
    modes: *mut u64,
) -> QcrbStatus {
    guard(|| {
        let s = handle(spec)?;
        write(n0, "n0", s.n0)?;
        write(time_bandwidth, "time_bandwidth", s.time_bandwidth())?;
        write(modes, "modes", s.modes.value)
    })
}

/// `1/(exp(hν/kT_s) − 1)`.
///
/// # Safety
/// `out` is null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcrb_planck_occupation(nu: f64, t_s: f64, out: *mut f64) -> QcrbStatus {
    guard(|| write(out, "out", physics::planck_occupation(nu, t_s)?.value))
}

/// Single-mode quantum Fisher information `1/(n₀(n₀+1))`.
///
/// # Safety
/// `out` is null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcrb_qfi_single_mode(n0: f64, out: *mut f64) -> QcrbStatus {
    guard(|| write(out, "out", qfi_single_mode(n0)?))
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QcrbBoundReport {
    pub qfi_single: f64,
    pub qfi_total: f64,
    pub var_bound: f64,
    pub rel_sens_bound: f64,
    pub temp_rel_sens_bound: f64,
}

/// # Safety
/// `spec` is a live handle; `out` is null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcrb_bound_report(spec: *const QcrbSourceSpec, out: *mut QcrbBoundReport) -> QcrbStatus {
    guard(|| {
        let r = bound_report(handle(spec)?)?;
        write(
            out,
            "out",
            QcrbBoundReport {
                qfi_single: r.qfi_single,
                qfi_total: r.qfi_total,
                var_bound: r.var_bound,
                rel_sens_bound: r.rel_sens_bound,
                temp_rel_sens_bound: r.temp_rel_sens_bound,
            },
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QcrbCompetitorCurves {
    pub radiometer: f64,
    pub lkd_claimed: f64,
    pub zmuidzinas: f64,
    pub t_samp: f64,
    pub lkd_regime_valid: bool,
    pub lkd_below_bound: bool,
    pub lkd_gap_factor: f64,
}

/// # Safety
/// `spec` is a live handle; `out` is null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcrb_competitor_sensitivities(
    spec: *const QcrbSourceSpec,
    t_samp: f64,
    out: *mut QcrbCompetitorCurves,
) -> QcrbStatus {
    guard(|| {
        let c = competitor_sensitivities(handle(spec)?, t_samp)?;
        write(
            out,
            "out",
            QcrbCompetitorCurves {
                radiometer: c.radiometer,
                lkd_claimed: c.lkd_claimed,
                zmuidzinas: c.zmuidzinas,
                t_samp: c.t_samp,
                lkd_regime_valid: c.lkd_regime_valid,
                lkd_below_bound: c.lkd_below_bound,
                lkd_gap_factor: c.lkd_gap_factor,
            },
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QcrbQfiCheck {
    pub n0: f64,
    pub cutoff: usize,
    pub tail_mass: f64,
    pub qfi_analytic: f64,
    pub qfi_numeric: f64,
    pub qfi_rel_error: f64,
    pub sld_residual: f64,
    pub sld_max_deviation: f64,
    pub pass: bool,
}

/// Numeric SLD and QFI against the closed forms. `cutoff = 0` picks the
/// recommended Fock cutoff; any other value is used as is.
///
/// # Safety
/// `out` is null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcrb_qfi_check(n0: f64, cutoff: usize, out: *mut QcrbQfiCheck) -> QcrbStatus {
    guard(|| {
        let policy = match cutoff {
            0 => CutoffPolicy::Recommended,
            d => CutoffPolicy::Fixed(d),
        };
        let r = qfi_check(n0, policy)?;
        write(
            out,
            "out",
            QcrbQfiCheck {
                n0: r.n0,
                cutoff: r.cutoff,
                tail_mass: r.tail_mass,
                qfi_analytic: r.qfi_analytic,
                qfi_numeric: r.qfi_numeric,
                qfi_rel_error: r.qfi_rel_error,
                sld_residual: r.sld_residual,
                sld_max_deviation: r.sld_max_deviation,
                pass: r.pass,
            },
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcrbEstimatorKind {
    PhotonCounting = 0,
    HeterodyneRadiometer = 1,
    TwoDetectorCorrelation = 2,
}

fn estimator_kind(raw: u32) -> Result<EstimatorKind, Failure> {
    match raw {
        0 => Ok(EstimatorKind::PhotonCounting),
        1 => Ok(EstimatorKind::HeterodyneRadiometer),
        2 => Ok(EstimatorKind::TwoDetectorCorrelation),
        _ => Err(Failure::Core(Error::Config(format!("unknown estimator kind {raw}")))),
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QcrbSensitivityReport {
    pub trials: usize,
    pub modes: usize,
    pub n0: f64,
    pub mean_estimate: f64,
    pub bias: f64,
    pub bias_sigma: f64,
    pub variance: f64,
    pub rel_sensitivity: f64,
    pub bootstrap_sigma: f64,
    pub rel_sensitivity_ci_low: f64,
    pub rel_sensitivity_ci_high: f64,
    pub bound: f64,
    pub ratio_to_bound: f64,
    pub expected_rel_sensitivity: f64,
    pub bound_satisfied: bool,
    pub seed: u64,
}

impl From<&SensitivityReport> for QcrbSensitivityReport {
    fn from(r: &SensitivityReport) -> Self {
        Self {
            trials: r.trials,
            modes: r.modes,
            n0: r.n0,
            mean_estimate: r.mean_estimate,
            bias: r.bias,
            bias_sigma: r.bias_sigma,
            variance: r.variance,
            rel_sensitivity: r.rel_sensitivity,
            bootstrap_sigma: r.bootstrap_sigma,
            rel_sensitivity_ci_low: r.rel_sensitivity_ci[0],
            rel_sensitivity_ci_high: r.rel_sensitivity_ci[1],
            bound: r.bound,
            ratio_to_bound: r.ratio_to_bound,
            expected_rel_sensitivity: r.expected_rel_sensitivity,
            bound_satisfied: r.bound_satisfied,
            seed: r.seed,
        }
    }
}

/// Monte Carlo run of one scheme; `kind` is a `QcrbEstimatorKind` value.
/// The report is written even when the bound check fails, in which case the
/// status is `Invariant`.
///
/// # Safety
/// `spec` is a live handle; `out` is null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcrb_run_experiment(
    spec: *const QcrbSourceSpec,
    kind: u32,
    trials: usize,
    master_seed: u64,
    out: *mut QcrbSensitivityReport,
) -> QcrbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let cfg = ExperimentConfig::new(*handle(spec)?, estimator_kind(kind)?, trials, master_seed)?;
        let report = run_experiment(&cfg)?;
        write(out, "out", QcrbSensitivityReport::from(&report))?;
        if report.bound_satisfied {
            Ok(())
        } else {
            Err(Failure::Core(Error::Invariant(format!(
                "{} beat the quantum Cramér-Rao bound",
                report.kind.tag()
            ))))
        }
    })
}
