//! C ABI over the `genalpha` crate.
//!
//! Every function returns a [`GaStatus`]; on failure the message is kept in a
//! thread-local slot readable through [`ga_last_error_message`]. Handles are
//! opaque, created by `*_new` functions and released by the matching
//! `*_free`. Panics never cross the boundary: they surface as
//! [`GaStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use genalpha::amplification::amplification_matrix;
use genalpha::integrator::{init_state, integrate, march, DiagonalProblem};
use genalpha::orderlab::table_c;
use genalpha::schemes::{in_stability_region, make_scheme};
use genalpha::stability::worst_case_radius;
use genalpha::{CVector, Complex64, Error, RhoBranch, SchemeParams, StateVector, TSamples, Variant};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    Singular = 4,
    NoConvergence = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// γ-rule selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaVariant {
    EqualGamma = 0,
    RemarkOne = 1,
}

/// ρ∞ branch selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaBranch {
    Main = 0,
    Alt1 = 1,
    Alt2 = 2,
    Alt3 = 3,
}

/// Opaque scheme handle.
pub struct GaScheme {
    params: SchemeParams,
}

/// Opaque state of a scalar run `u' + λu = 0`.
pub struct GaScalarState {
    params: SchemeParams,
    problem: DiagonalProblem,
    state: StateVector,
    steps: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        buf.clear();
        buf.extend_from_slice(msg.as_bytes());
    });
}

fn status_of(e: &Error) -> GaStatus {
    match e {
        Error::InvalidArgument(_) | Error::OutOfTable(_) | Error::PoleAtRho { .. } | Error::DimensionMismatch(_) => {
            GaStatus::InvalidArgument
        }
        Error::VariantUnsupported(_) | Error::DimensionTooLarge { .. } => GaStatus::Unsupported,
        Error::SingularMatrix { .. }
        | Error::SingularAtT { .. }
        | Error::StepSingular
        | Error::DegenerateAlphaM
        | Error::DegenerateParams(_) => GaStatus::Singular,
        Error::StepFailed { source, .. } => status_of(source),
        Error::NoConvergence { .. } | Error::NoRoot { .. } => GaStatus::NoConvergence,
        _ => GaStatus::Numerical,
    }
}

struct Fail(GaStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), format!("{}: {e}", e.kind()))
    }
}

fn null(what: &str) -> Fail {
    Fail(GaStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording failures and catching panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GaStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("panic inside genalpha");
            GaStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn variant_of(v: GaVariant) -> Variant {
    match v {
        GaVariant::EqualGamma => Variant::EqualGamma,
        GaVariant::RemarkOne => Variant::RemarkOne,
    }
}

fn branch_of(b: GaBranch) -> RhoBranch {
    match b {
        GaBranch::Main => RhoBranch::Main,
        GaBranch::Alt1 => RhoBranch::Alt1,
        GaBranch::Alt2 => RhoBranch::Alt2,
        GaBranch::Alt3 => RhoBranch::Alt3,
    }
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn ga_status_name(status: GaStatus) -> *const c_char {
    let s: &'static CStr = match status {
        GaStatus::Ok => c"ok",
        GaStatus::NullPointer => c"null_pointer",
        GaStatus::InvalidArgument => c"invalid_argument",
        GaStatus::Unsupported => c"unsupported",
        GaStatus::Singular => c"singular",
        GaStatus::NoConvergence => c"no_convergence",
        GaStatus::Numerical => c"numerical",
        GaStatus::BufferTooSmall => c"buffer_too_small",
        GaStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len − 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ga_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Scheme of order `p` at (α_m, α_f) under `variant`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to free
/// with [`ga_scheme_free`].
#[no_mangle]
pub unsafe extern "C" fn ga_scheme_new(
    p: usize,
    alpha_m: f64,
    alpha_f: f64,
    variant: GaVariant,
    out: *mut *mut GaScheme,
) -> GaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let params = make_scheme(p, alpha_m, alpha_f, variant_of(variant))?;
        *out = Box::into_raw(Box::new(GaScheme { params }));
        Ok(())
    })
}

/// EqualGamma scheme of order `p` with (α_m, α_f) from ρ∞ on `branch`.
///
/// # Safety
/// As for [`ga_scheme_new`].
#[no_mangle]
pub unsafe extern "C" fn ga_scheme_from_rho(p: usize, rho_inf: f64, branch: GaBranch, out: *mut *mut GaScheme) -> GaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let params = SchemeParams::from_rho(p, rho_inf, branch_of(branch))?;
        *out = Box::into_raw(Box::new(GaScheme { params }));
        Ok(())
    })
}

/// Releases a scheme; null is ignored.
///
/// # Safety
/// `scheme` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ga_scheme_free(scheme: *mut GaScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Order p, α_m and α_f of a scheme. Any output pointer may be null.
///
/// # Safety
/// `scheme` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ga_scheme_info(
    scheme: *const GaScheme,
    p: *mut usize,
    alpha_m: *mut f64,
    alpha_f: *mut f64,
) -> GaStatus {
    guard(|| {
        let s = &in_ref(scheme, "scheme")?.params;
        if let Some(p) = p.as_mut() {
            *p = s.p;
        }
        if let Some(a) = alpha_m.as_mut() {
            *a = s.alpha_m;
        }
        if let Some(a) = alpha_f.as_mut() {
            *a = s.alpha_f;
        }
        Ok(())
    })
}

/// Writes γ₁ … γ_{p−1} into `out` (capacity `len`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ga_scheme_gammas(scheme: *const GaScheme, out: *mut f64, len: usize) -> GaStatus {
    guard(|| {
        let s = &in_ref(scheme, "scheme")?.params;
        if out.is_null() {
            return Err(null("out"));
        }
        if len < s.gammas.len() {
            return Err(Fail(
                GaStatus::BufferTooSmall,
                format!("need {} entries, got {len}", s.gammas.len()),
            ));
        }
        ptr::copy_nonoverlapping(s.gammas.as_ptr(), out, s.gammas.len());
        Ok(())
    })
}

/// Row-major G(T) for T = t_re + i·t_im, split into real and imaginary
/// parts; each buffer needs p·p entries.
///
/// # Safety
/// `out_re` and `out_im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ga_amplification_matrix(
    scheme: *const GaScheme,
    t_re: f64,
    t_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> GaStatus {
    guard(|| {
        let s = &in_ref(scheme, "scheme")?.params;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output buffer"));
        }
        let n = s.p * s.p;
        if len < n {
            return Err(Fail(GaStatus::BufferTooSmall, format!("need {n} entries, got {len}")));
        }
        let g = amplification_matrix(s, Complex64::new(t_re, t_im))?;
        for (k, z) in g.as_slice().iter().enumerate() {
            *out_re.add(k) = z.re;
            *out_im.add(k) = z.im;
        }
        Ok(())
    })
}

/// Worst-case spectral radius over the default real-axis samples and the
/// T → 0, ∞ limits; `stable` reports the full stability verdict.
///
/// # Safety
/// `radius` must be valid; `stable` may be null.
#[no_mangle]
pub unsafe extern "C" fn ga_worst_case_radius(scheme: *const GaScheme, radius: *mut f64, stable: *mut bool) -> GaStatus {
    guard(|| {
        let s = &in_ref(scheme, "scheme")?.params;
        let radius = out_ref(radius, "radius")?;
        let rep = worst_case_radius(s, &TSamples::default_real());
        *radius = rep.radius;
        if let Some(st) = stable.as_mut() {
            *st = rep.is_stable();
        }
        Ok(())
    })
}

/// Table value C(p), 2 ≤ p ≤ 11.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ga_c_of_p(p: usize, out: *mut f64) -> GaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = table_c(p)?;
        Ok(())
    })
}

/// Closed-form unconditional-stability predicate of the third-order
/// EqualGamma scheme.
#[no_mangle]
pub extern "C" fn ga_in_stability_region(alpha_m: f64, alpha_f: f64) -> bool {
    in_stability_region(alpha_m, alpha_f)
}

/// Starts a scalar run of `u' + λu = 0` from `u0` with step `tau`. The scheme
/// is copied, so the scheme handle may be freed afterwards.
///
/// # Safety
/// `scheme` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ga_scalar_state_new(
    scheme: *const GaScheme,
    lambda_re: f64,
    lambda_im: f64,
    u0_re: f64,
    u0_im: f64,
    tau: f64,
    out: *mut *mut GaScalarState,
) -> GaStatus {
    guard(|| {
        let params = in_ref(scheme, "scheme")?.params.clone();
        let out = out_ref(out, "out")?;
        let problem = DiagonalProblem::scalar(Complex64::new(lambda_re, lambda_im));
        let state = init_state(&problem, &CVector(vec![Complex64::new(u0_re, u0_im)]), params.p, tau)?;
        *out = Box::into_raw(Box::new(GaScalarState {
            params,
            problem,
            state,
            steps: 0,
        }));
        Ok(())
    })
}

/// Advances a scalar run by `n_steps`. On failure the state is unchanged.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ga_scalar_state_step(state: *mut GaScalarState, n_steps: u64) -> GaStatus {
    guard(|| {
        let st = out_ref(state, "state")?;
        let n = usize::try_from(n_steps).map_err(|_| Fail(GaStatus::InvalidArgument, "step count too large".into()))?;
        let next = march(&st.params, &st.problem, st.state.clone(), n, |_, _| {})?;
        st.state = next;
        st.steps += n_steps;
        Ok(())
    })
}

/// Current U⁽⁰⁾ and time t = steps·τ. Any output pointer may be null.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ga_scalar_state_value(
    state: *const GaScalarState,
    u_re: *mut f64,
    u_im: *mut f64,
    t: *mut f64,
) -> GaStatus {
    guard(|| {
        let st = in_ref(state, "state")?;
        let u = st.state.solution()[0];
        if let Some(x) = u_re.as_mut() {
            *x = u.re;
        }
        if let Some(x) = u_im.as_mut() {
            *x = u.im;
        }
        if let Some(x) = t.as_mut() {
            *x = st.steps as f64 * st.state.tau;
        }
        Ok(())
    })
}

/// Releases a scalar state; null is ignored.
///
/// # Safety
/// `state` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ga_scalar_state_free(state: *mut GaScalarState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Integrates `u' + λu = 0`, `u(0) = 1`, over round(t_end/τ) steps and writes
/// U⁽⁰⁾ at every step (t = 0 included). `written` receives the sample count;
/// when `capacity` is too small nothing is copied and `written` holds the
/// required size.
///
/// # Safety
/// `out_re`/`out_im` must point to `capacity` doubles; `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ga_integrate_scalar(
    scheme: *const GaScheme,
    lambda_re: f64,
    lambda_im: f64,
    tau: f64,
    t_end: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> GaStatus {
    guard(|| {
        let s = &in_ref(scheme, "scheme")?.params;
        let written = out_ref(written, "written")?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output buffer"));
        }
        let problem = DiagonalProblem::scalar(Complex64::new(lambda_re, lambda_im));
        let traj = integrate(s, &problem, &CVector(vec![Complex64::new(1.0, 0.0)]), tau, t_end)?;
        *written = traj.len();
        if capacity < traj.len() {
            return Err(Fail(
                GaStatus::BufferTooSmall,
                format!("need {} samples, got {capacity}", traj.len()),
            ));
        }
        for (k, v) in traj.values.iter().enumerate() {
            *out_re.add(k) = v[0].re;
            *out_im.add(k) = v[0].im;
        }
        Ok(())
    })
}
