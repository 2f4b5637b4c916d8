//! C ABI over `qspeed`.
//!
//! Every fallible function returns a [`QsStatus`]; on failure a message is
//! available from [`qs_last_error`] on the same thread. Traces are opaque
//! handles created by [`qs_trace_new`] and released by [`qs_trace_free`].
//! Panics are caught at the boundary and reported as `QS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qspeed::dynamics::{decay_and_shift, AmplitudeTrace};
use qspeed::kernel::{kernel_closed_form, kernel_full_form, kernel_quadrature, QuadratureOptions};
use qspeed::metrics::MetricsReport;
use qspeed::model::{derive_kernel_params, EtaConvention, PhysicalParams};
use qspeed::sweep::amplitude_trace;
use qspeed::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    DegenerateRoots = 3,
    QuadratureNotConverged = 4,
    StepTooCoarse = 5,
    AmplitudeNode = 6,
    ZeroEvolution = 7,
    IndexOutOfRange = 8,
    InvalidGrid = 9,
    Other = 10,
    Panic = 11,
}

impl From<&Error> for QsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParams { .. } => QsStatus::InvalidParams,
            Error::DegenerateRoots { .. } => QsStatus::DegenerateRoots,
            Error::QuadratureNotConverged { .. } => QsStatus::QuadratureNotConverged,
            Error::StepTooCoarse { .. } => QsStatus::StepTooCoarse,
            Error::AmplitudeNode { .. } => QsStatus::AmplitudeNode,
            Error::ZeroEvolution => QsStatus::ZeroEvolution,
            Error::IndexOutOfRange { .. } => QsStatus::IndexOutOfRange,
            Error::InvalidGrid(_) => QsStatus::InvalidGrid,
            _ => QsStatus::Other,
        }
    }
}

/// Sign of Im η; `QS_ETA_MINUS` is the default.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsEta {
    Minus = 0,
    Plus = 1,
}

impl From<QsEta> for EtaConvention {
    fn from(e: QsEta) -> Self {
        match e {
            QsEta::Minus => EtaConvention::Minus,
            QsEta::Plus => EtaConvention::Plus,
        }
    }
}

/// Physical parameters in SI units (rad/s, s).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsPhysicalParams {
    pub omega0: f64,
    pub omega_l: f64,
    pub drive: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub beta: f64,
    pub tau0: f64,
    pub horizon: f64,
}

impl From<&QsPhysicalParams> for PhysicalParams {
    fn from(p: &QsPhysicalParams) -> Self {
        PhysicalParams {
            omega0: p.omega0,
            omega_l: p.omega_l,
            drive: p.drive,
            gamma: p.gamma,
            lambda: p.lambda,
            beta: p.beta,
            tau0: p.tau0,
            horizon: p.horizon,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QsComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QsSample {
    pub t: f64,
    pub c1: QsComplex,
    pub c1dot: QsComplex,
    pub pop: f64,
    pub popdot: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QsMetrics {
    pub tau: f64,
    pub tau_qsl: f64,
    pub n_blp: f64,
    pub pop_tau: f64,
    pub identity_residual: f64,
}

/// Opaque amplitude trace.
pub struct QsTrace {
    trace: AmplitudeTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, records any error or panic and converts it to a status.
fn guard<F: FnOnce() -> Result<(), QsStatus>>(f: F) -> QsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            QsStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            QsStatus::Panic
        }
    }
}

fn fail(e: Error) -> QsStatus {
    set_last_error(&e.to_string());
    QsStatus::from(&e)
}

fn null(what: &str) -> QsStatus {
    set_last_error(&format!("null pointer: {what}"));
    QsStatus::NullPointer
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn qs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default parameters: ω₀ = ω_L = 5.1e9, γ = λ = 10, a 0.23 m cavity, no
/// drive, at rest, τ = 1.
#[no_mangle]
pub extern "C" fn qs_params_default() -> QsPhysicalParams {
    let p = PhysicalParams::default();
    QsPhysicalParams {
        omega0: p.omega0,
        omega_l: p.omega_l,
        drive: p.drive,
        gamma: p.gamma,
        lambda: p.lambda,
        beta: p.beta,
        tau0: p.tau0,
        horizon: p.horizon,
    }
}

/// Computes the amplitude trace over [0, horizon] starting from `samples`
/// points (refined automatically). On success `*out` owns a new handle.
///
/// # Safety
/// `params` must point to a valid struct and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_new(
    params: *const QsPhysicalParams,
    eta: QsEta,
    samples: usize,
    out: *mut *mut QsTrace,
) -> QsStatus {
    guard(|| {
        if params.is_null() {
            return Err(null("params"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = PhysicalParams::from(&*params);
        let (_, trace) = amplitude_trace(&p, eta.into(), samples).map_err(fail)?;
        *out = Box::into_raw(Box::new(QsTrace { trace }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `trace` must come from [`qs_trace_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_free(trace: *mut QsTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of samples, 0 for null.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_len(trace: *const QsTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.trace.len())
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_sample(trace: *const QsTrace, index: usize, out: *mut QsSample) -> QsStatus {
    guard(|| {
        let t = &trace.as_ref().ok_or_else(|| null("trace"))?.trace;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        t.check_index(index).map_err(fail)?;
        let (c, d) = (t.c1[index], t.c1dot[index]);
        *out = QsSample {
            t: t.grid[index],
            c1: QsComplex { re: c.re, im: c.im },
            c1dot: QsComplex { re: d.re, im: d.im },
            pop: t.pop[index],
            popdot: t.popdot[index],
        };
        Ok(())
    })
}

/// τ_qsl, N and the identity residual of the trace.
///
/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_metrics(trace: *const QsTrace, out: *mut QsMetrics) -> QsStatus {
    guard(|| {
        let t = &trace.as_ref().ok_or_else(|| null("trace"))?.trace;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = MetricsReport::compute(t).map_err(fail)?;
        *out = QsMetrics {
            tau: m.tau,
            tau_qsl: m.tau_qsl,
            n_blp: m.n_blp,
            pop_tau: m.pop_tau,
            identity_residual: m.identity_residual,
        };
        Ok(())
    })
}

/// Time-local decay rate Γ(t) and Lamb shift S(t) at a sample.
///
/// # Safety
/// `trace` must be a live handle; `gamma` and `shift` writable.
#[no_mangle]
pub unsafe extern "C" fn qs_trace_decay_and_shift(
    trace: *const QsTrace,
    index: usize,
    gamma: *mut f64,
    shift: *mut f64,
) -> QsStatus {
    guard(|| {
        let t = &trace.as_ref().ok_or_else(|| null("trace"))?.trace;
        let gamma = gamma.as_mut().ok_or_else(|| null("gamma"))?;
        let shift = shift.as_mut().ok_or_else(|| null("shift"))?;
        let r = decay_and_shift(t, index).map_err(fail)?;
        *gamma = r.gamma;
        *shift = r.shift;
        Ok(())
    })
}

/// Stationary closed-form kernel F(t, t₁); `full != 0` keeps the
/// exp(±2μβt₁) factors.
///
/// # Safety
/// `params` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qs_kernel_closed(
    params: *const QsPhysicalParams,
    eta: QsEta,
    full: i32,
    t: f64,
    t1: f64,
    out: *mut QsComplex,
) -> QsStatus {
    guard(|| {
        let p = PhysicalParams::from(params.as_ref().ok_or_else(|| null("params"))?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let kp = derive_kernel_params(&p, eta.into()).map_err(fail)?;
        let v = if full != 0 { kernel_full_form(t, t1, &kp) } else { kernel_closed_form(t, t1, &kp) }.value;
        *out = QsComplex { re: v.re, im: v.im };
        Ok(())
    })
}

/// Kernel by numerical quadrature of the frequency integral over [0, ∞).
/// `error` may be null.
///
/// # Safety
/// `params` must be valid, `out` writable, `error` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qs_kernel_quadrature(
    params: *const QsPhysicalParams,
    t: f64,
    t1: f64,
    out: *mut QsComplex,
    error: *mut f64,
) -> QsStatus {
    guard(|| {
        let p = PhysicalParams::from(params.as_ref().ok_or_else(|| null("params"))?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let e = kernel_quadrature(t, t1, &p, &QuadratureOptions::default()).map_err(fail)?;
        *out = QsComplex { re: e.kernel.value.re, im: e.kernel.value.im };
        if let Some(err) = error.as_mut() {
            *err = e.error;
        }
        Ok(())
    })
}
