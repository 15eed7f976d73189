//! C interface to the `ardc` solver.
//!
//! Solves return an opaque [`ArdcReport`] through an out-pointer together with
//! an [`ArdcStatus`]. On failure the message is available from
//! [`ardc_last_error_message`] on the same thread. Reports are released with
//! [`ardc_report_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ardc::{
    dense_eval, solve, ArdcError, BuiltinProblem, CoefficientPair, InitialValueProblem, SolveReport, SolverOptions,
};
use num_complex::Complex64;

/// Result codes. `Ok` is zero; solver errors keep their own codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArdcStatus {
    Ok = 0,
    InvalidParameter = 1,
    OutOfRange = 2,
    Domain = 3,
    NonFinite = 4,
    DegenerateDenominator = 5,
    DegenerateMatching = 6,
    NotConverged = 7,
    NumericalFailure = 8,
    StepUnderflow = 9,
    OracleRefusal = 10,
    NotApplicable = 11,
    InvalidBall = 12,
    NullPointer = 13,
    Panic = 14,
}

impl From<&ArdcError> for ArdcStatus {
    fn from(e: &ArdcError) -> Self {
        match e {
            ArdcError::InvalidParameter(_) => ArdcStatus::InvalidParameter,
            ArdcError::OutOfRange { .. } => ArdcStatus::OutOfRange,
            ArdcError::Domain { .. } => ArdcStatus::Domain,
            ArdcError::NonFinite(_) => ArdcStatus::NonFinite,
            ArdcError::DegenerateDenominator { .. } => ArdcStatus::DegenerateDenominator,
            ArdcError::DegenerateMatching { .. } => ArdcStatus::DegenerateMatching,
            ArdcError::NotConverged { .. } => ArdcStatus::NotConverged,
            ArdcError::NumericalFailure(_) => ArdcStatus::NumericalFailure,
            ArdcError::StepUnderflow { .. } => ArdcStatus::StepUnderflow,
            ArdcError::OracleRefusal(_) => ArdcStatus::OracleRefusal,
            ArdcError::NotApplicable(_) => ArdcStatus::NotApplicable,
            ArdcError::InvalidBall(_) => ArdcStatus::InvalidBall,
        }
    }
}

/// Built-in equations. `param` of `ardc_solve_builtin` is `lambda`, `nu`,
/// `m` or `omega` respectively and is ignored for Airy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArdcProblemKind {
    Airy = 0,
    Bremer237 = 1,
    Legendre = 2,
    Burst = 3,
    Tone = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArdcComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ArdcComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ArdcComplex> for Complex64 {
    fn from(z: ArdcComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Solver settings. Start from `ardc_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArdcOptions {
    pub eps: f64,
    pub eps_h: f64,
    pub n_ricc: usize,
    pub n_spec: usize,
    /// Skip dense phase data; dense evaluation inside oscillatory steps then fails.
    pub endpoint_only: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArdcStats {
    pub osc_attempted: u64,
    pub osc_accepted: u64,
    pub spectral_attempted: u64,
    pub spectral_accepted: u64,
    /// Scalar coefficient evaluations.
    pub n_f: u64,
    /// Least-squares solves.
    pub n_ls: u64,
}

/// Opaque solve result.
pub struct ArdcReport {
    inner: SolveReport,
}

/// Coefficient callback: returns `omega(t)` or `gamma(t)`. Nullable.
pub type ArdcCoeffFn = Option<extern "C" fn(t: f64, user_data: *mut c_void) -> f64>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (ArdcStatus, String)>) -> ArdcStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ArdcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ArdcStatus::Panic
        }
    }
}

fn solver_err(e: ArdcError) -> (ArdcStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (ArdcStatus, String) {
    (ArdcStatus::NullPointer, format!("{what} is null"))
}

fn to_options(o: &ArdcOptions) -> SolverOptions {
    let mut opts = SolverOptions::default()
        .with_eps(o.eps)
        .with_eps_h(o.eps_h)
        .with_n_ricc(o.n_ricc)
        .with_n_spec(o.n_spec);
    opts.endpoint_only = o.endpoint_only;
    opts
}

fn read_options(opts: *const ArdcOptions) -> SolverOptions {
    if opts.is_null() {
        SolverOptions::default()
    } else {
        // SAFETY: caller passes a valid pointer or null
        to_options(unsafe { &*opts })
    }
}

fn finish(
    ivp: &InitialValueProblem,
    opts: &SolverOptions,
    out: *mut *mut ArdcReport,
) -> Result<(), (ArdcStatus, String)> {
    let inner = solve(ivp, opts).map_err(solver_err)?;
    let boxed = Box::new(ArdcReport { inner });
    // SAFETY: `out` was checked non-null by the caller of this helper
    unsafe { *out = Box::into_raw(boxed) };
    Ok(())
}

/// The library defaults: `eps = 1e-12`, `eps_h = 1e-13`, 16 nodes each.
#[no_mangle]
pub extern "C" fn ardc_options_default() -> ArdcOptions {
    let d = SolverOptions::default();
    ArdcOptions {
        eps: d.eps,
        eps_h: d.controller.eps_h,
        n_ricc: d.n_ricc,
        n_spec: d.n_spec,
        endpoint_only: d.endpoint_only,
    }
}

/// Solves a built-in problem. A NaN `t0` or `t1` keeps the problem's own
/// interval; `opts` may be null for defaults.
///
/// # Safety
/// `out` must be a valid pointer to writable storage; `opts` must be null
/// or point to an `ArdcOptions`.
#[no_mangle]
pub unsafe extern "C" fn ardc_solve_builtin(
    kind: ArdcProblemKind,
    param: f64,
    t0: f64,
    t1: f64,
    opts: *const ArdcOptions,
    out: *mut *mut ArdcReport,
) -> ArdcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = match kind {
            ArdcProblemKind::Airy => BuiltinProblem::Airy,
            ArdcProblemKind::Bremer237 => BuiltinProblem::Bremer237 { lambda: param },
            ArdcProblemKind::Legendre => {
                if !(param >= 1.0 && param.fract() == 0.0 && param <= u64::MAX as f64) {
                    return Err((
                        ArdcStatus::InvalidParameter,
                        format!("Legendre degree must be a positive integer, got {param}"),
                    ));
                }
                BuiltinProblem::Legendre { nu: param as u64 }
            }
            ArdcProblemKind::Burst => BuiltinProblem::Burst { m: param },
            ArdcProblemKind::Tone => BuiltinProblem::Tone { omega: param },
        };
        let mut ivp = p.ivp().map_err(solver_err)?;
        if !t0.is_nan() || !t1.is_nan() {
            let a = if t0.is_nan() { ivp.t0 } else { t0 };
            let b = if t1.is_nan() { ivp.t1 } else { t1 };
            ivp = ivp.with_interval(a, b).map_err(solver_err)?;
        }
        finish(&ivp, &read_options(opts), out)
    })
}

struct Callback {
    f: extern "C" fn(f64, *mut c_void) -> f64,
    data: *mut c_void,
}

// SAFETY: the solver calls coefficients only on the thread that called
// `ardc_solve`, while that call is running.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Callback {
    fn call(&self, t: f64) -> f64 {
        (self.f)(t, self.data)
    }
}

/// Solves `u'' + 2 gamma u' + omega^2 u = 0` on `[t0, t1]` with callbacks.
/// `gamma` may be null (identically zero). Both callbacks receive
/// `user_data` and are called only from this thread during the call.
/// `h_init` is the width used to estimate `omega'` at `t0`.
///
/// # Safety
/// `omega` must be a valid function pointer; `out` must be writable;
/// `opts` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ardc_solve(
    omega: ArdcCoeffFn,
    gamma: ArdcCoeffFn,
    user_data: *mut c_void,
    t0: f64,
    t1: f64,
    u0: ArdcComplex,
    du0: ArdcComplex,
    h_init: f64,
    opts: *const ArdcOptions,
    out: *mut *mut ArdcReport,
) -> ArdcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let omega = omega.ok_or_else(|| null("omega"))?;
        let w = Callback {
            f: omega,
            data: user_data,
        };
        let mut pair = CoefficientPair::new(move |t| w.call(t), "callback");
        if let Some(g) = gamma {
            let g = Callback { f: g, data: user_data };
            pair = pair.with_gamma(move |t| g.call(t));
        }
        let ivp = InitialValueProblem::new(pair, t0, t1, u0.into(), du0.into(), h_init).map_err(solver_err)?;
        finish(&ivp, &read_options(opts), out)
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from a solve call and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ardc_report_free(report: *mut ArdcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of solution points: `t0` and the end of every accepted step.
/// Zero for a null report.
///
/// # Safety
/// `report` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ardc_report_len(report: *const ArdcReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.t_grid.len())
}

/// Solution point `index`. Any of the out-pointers may be null.
///
/// # Safety
/// `report` must be valid; non-null out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardc_report_point(
    report: *const ArdcReport,
    index: usize,
    t: *mut f64,
    u: *mut ArdcComplex,
    du: *mut ArdcComplex,
) -> ArdcStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        if index >= r.t_grid.len() {
            return Err((
                ArdcStatus::OutOfRange,
                format!("index {index} outside 0..{}", r.t_grid.len()),
            ));
        }
        if !t.is_null() {
            *t = r.t_grid[index];
        }
        if !u.is_null() {
            *u = r.u[index].into();
        }
        if !du.is_null() {
            *du = r.du[index].into();
        }
        Ok(())
    })
}

/// Step counts and evaluation counts of the solve.
///
/// # Safety
/// `report` must be valid and `stats` writable.
#[no_mangle]
pub unsafe extern "C" fn ardc_report_stats(report: *const ArdcReport, stats: *mut ArdcStats) -> ArdcStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        let out = stats.as_mut().ok_or_else(|| null("stats"))?;
        let s = r.stats;
        *out = ArdcStats {
            osc_attempted: s.n_s_osc.attempted,
            osc_accepted: s.n_s_osc.accepted,
            spectral_attempted: s.n_s_slo.attempted,
            spectral_accepted: s.n_s_slo.accepted,
            n_f: s.n_f,
            n_ls: s.n_ls,
        };
        Ok(())
    })
}

/// Condition estimate `kappa`; NaN for a null report.
///
/// # Safety
/// `report` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ardc_report_kappa(report: *const ArdcReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.kappa)
}

/// Best attainable relative accuracy, `kappa * eps_mach`; NaN for a null report.
///
/// # Safety
/// `report` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ardc_report_eps_floor(report: *const ArdcReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.eps_floor)
}

/// `(u, u')` at any `t` inside the solved interval.
///
/// # Safety
/// `report` must be valid; `u` and `du` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ardc_report_eval(
    report: *const ArdcReport,
    t: f64,
    u: *mut ArdcComplex,
    du: *mut ArdcComplex,
) -> ArdcStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.inner;
        if u.is_null() || du.is_null() {
            return Err(null("output"));
        }
        let (a, b) = dense_eval(r, t).map_err(solver_err)?;
        *u = a.into();
        *du = b.into();
        Ok(())
    })
}

/// Message for the last failing call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ardc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn ardc_status_name(status: ArdcStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        ArdcStatus::Ok => b"ok\0",
        ArdcStatus::InvalidParameter => b"invalid_parameter\0",
        ArdcStatus::OutOfRange => b"out_of_range\0",
        ArdcStatus::Domain => b"domain\0",
        ArdcStatus::NonFinite => b"non_finite\0",
        ArdcStatus::DegenerateDenominator => b"degenerate_denominator\0",
        ArdcStatus::DegenerateMatching => b"degenerate_matching\0",
        ArdcStatus::NotConverged => b"not_converged\0",
        ArdcStatus::NumericalFailure => b"numerical_failure\0",
        ArdcStatus::StepUnderflow => b"step_underflow\0",
        ArdcStatus::OracleRefusal => b"oracle_refusal\0",
        ArdcStatus::NotApplicable => b"not_applicable\0",
        ArdcStatus::InvalidBall => b"invalid_ball\0",
        ArdcStatus::NullPointer => b"null_pointer\0",
        ArdcStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ardc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
