//! C ABI for `lipuncert`.
//!
//! Conventions:
//!
//! - Every fallible function returns an [`LuStatus`]; results go through out
//!   pointers, which are written only on success.
//! - On failure, [`lu_last_error`] returns a message for the calling thread.
//! - Instances and campaign reports are opaque handles; release them with
//!   [`lu_instance_free`] and [`lu_report_free`].
//! - Strings returned by the library are owned by the caller and must be
//!   released with [`lu_string_free`].
//! - Complex vectors and matrices are passed as separate real and imaginary
//!   `double` arrays; matrices are square and row-major.
//! - A norm exponent `p` is a `double` in `[1, inf]`; pass `INFINITY` for the
//!   max norm.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lipuncert::harness::{emit_report, run_campaign, run_campaign_with_workers, CampaignConfig, CampaignReport, ReportFormat};
use lipuncert::model::generate_instance;
use lipuncert::space::{dual_norm, norm};
use lipuncert::uncertainty::{chain_nhrs, delta_hilbert, hilbert_reduction_check, ChainOptions, Status};
use lipuncert::{Complex64, Error, GenConfig, Instance, Matrix, Mode, NormSpec, Vector};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    ParseError = 4,
    /// A mathematical precondition failed (non-Hermitian matrix, non-unit state, domain escape, ...).
    DomainError = 5,
    Panic = 6,
}

/// Instance family, passed as `uint32_t`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LuMode {
    Hilbert = 0,
    BanachLinear = 1,
    BanachNonlinear = 2,
}

/// Overall status of a chain or trial.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LuChainStatus {
    Passed = 0,
    EmpiricalNegative = 1,
    Violation = 2,
}

/// Opaque generated or parsed instance.
pub struct LuInstance(Instance);

/// Opaque campaign report.
pub struct LuReport(CampaignReport);

/// Terms of the chain `(nabla^2 + delta^2)/2 >= (nabla + delta)^2/4 >= nabla delta >= |f(ABx) - f(Ax) f(Bx)|`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LuChainSummary {
    pub nabla: f64,
    pub delta: f64,
    pub half_sum_squares: f64,
    pub quarter_square_sum: f64,
    pub product: f64,
    /// `|g(y)|` with `y = Bx - f(Bx) x`
    pub middle_form: f64,
    pub final_bound: f64,
    pub min_slack: f64,
    /// 1 when `nabla` is computed exactly, 0 when it is a sampled lower bound.
    pub nabla_exact: u32,
    /// An [`LuChainStatus`] value.
    pub status: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LuCounts {
    pub passed: u64,
    pub empirical_negative: u64,
    pub violations: u64,
    pub skipped: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(LuStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Json(_) | Error::InvalidExponentText(_) | Error::MalformedReport(_) => LuStatus::ParseError,
            Error::InvalidVector(_)
            | Error::InvalidMatrix(_)
            | Error::InvalidExponent(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidInstance(_) => LuStatus::InvalidArgument,
            _ => LuStatus::DomainError,
        };
        Failure(code, e.to_string())
    }
}

fn fail(code: LuStatus, msg: impl Into<String>) -> Failure {
    Failure(code, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body`, records any failure or panic, and maps it to a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LuStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LuStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(_) => {
            set_last_error("internal panic".into());
            LuStatus::Panic
        }
    }
}

fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| fail(LuStatus::NullPointer, format!("{name} is null")))
}

fn in_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| fail(LuStatus::NullPointer, format!("{name} is null")))
}

fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(LuStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn complex_entries(re: *const f64, im: *const f64, len: usize, name: &str) -> Result<Vec<Complex64>, Failure> {
    let re = slice(re, len, name)?;
    // a null imaginary part means a real input
    let im = if im.is_null() { vec![0.0; len] } else { slice(im, len, name)?.to_vec() };
    Ok(re.iter().zip(im).map(|(&r, i)| Complex64::new(r, i)).collect())
}

fn vector(re: *const f64, im: *const f64, len: usize, name: &str) -> Result<Vector, Failure> {
    Ok(Vector::new(complex_entries(re, im, len, name)?)?)
}

fn matrix(re: *const f64, im: *const f64, dim: usize, name: &str) -> Result<Matrix, Failure> {
    let len = dim.checked_mul(dim).ok_or_else(|| fail(LuStatus::InvalidArgument, "dimension overflow"))?;
    let entries = complex_entries(re, im, len, name)?;
    let rows = entries.chunks(dim.max(1)).map(<[Complex64]>::to_vec).collect();
    Ok(Matrix::from_rows(rows)?)
}

fn exponent(p: f64) -> Result<NormSpec, Failure> {
    if p == f64::INFINITY {
        Ok(NormSpec::Infinity)
    } else {
        Ok(NormSpec::new(p)?)
    }
}

fn mode(m: u32) -> Result<Mode, Failure> {
    match m {
        0 => Ok(Mode::Hilbert),
        1 => Ok(Mode::BanachLinear),
        2 => Ok(Mode::BanachNonlinear),
        _ => Err(fail(LuStatus::InvalidArgument, format!("unknown mode {m}"))),
    }
}

fn c_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(fail(LuStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: the caller passes a nul-terminated string.
    unsafe { CStr::from_ptr(s) }.to_str().map_err(|e| fail(LuStatus::InvalidUtf8, e.to_string()))
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|e| fail(LuStatus::InvalidArgument, e.to_string()))
}

fn chain_status(s: Status) -> u32 {
    (match s {
        Status::Passed => LuChainStatus::Passed,
        Status::EmpiricalNegative => LuChainStatus::EmpiricalNegative,
        Status::Violation => LuChainStatus::Violation,
    }) as u32
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn lu_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lu_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `||v||_p`. `im` may be null for a real vector.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_norm(re: *const f64, im: *const f64, len: usize, p: f64, out: *mut f64) -> LuStatus {
    guard(|| {
        let v = vector(re, im, len, "re")?;
        let value = norm(&v, exponent(p)?);
        *out_ref(out, "out")? = value;
        Ok(())
    })
}

/// Norm of the functional `u -> sum u_i conj(w_i)` on `l_p`, i.e. `||w||_q` with `1/p + 1/q = 1`.
///
/// # Safety
/// As for [`lu_norm`].
#[no_mangle]
pub unsafe extern "C" fn lu_dual_norm(re: *const f64, im: *const f64, len: usize, p: f64, out: *mut f64) -> LuStatus {
    guard(|| {
        let w = vector(re, im, len, "re")?;
        let value = dual_norm(&w, exponent(p)?);
        *out_ref(out, "out")? = value;
        Ok(())
    })
}

/// `||Ah - <Ah,h>h||` for a Hermitian `dim x dim` matrix `A` and a unit vector `h`.
///
/// # Safety
/// `a_re`/`a_im` must point to `dim * dim` doubles, `h_re`/`h_im` to `dim`
/// doubles (imaginary parts may be null); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_delta_hilbert(
    a_re: *const f64,
    a_im: *const f64,
    h_re: *const f64,
    h_im: *const f64,
    dim: usize,
    out: *mut f64,
) -> LuStatus {
    guard(|| {
        let a = matrix(a_re, a_im, dim, "a_re")?;
        let h = vector(h_re, h_im, dim, "h_re")?;
        let value = delta_hilbert(&a, &h)?;
        *out_ref(out, "out")? = value;
        Ok(())
    })
}

/// `nabla(<., h>, A, h)` by the dual formula, next to `||Ah - <Ah,h>h||`.
///
/// # Safety
/// As for [`lu_delta_hilbert`]; `nabla` and `delta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_hilbert_reduction(
    a_re: *const f64,
    a_im: *const f64,
    h_re: *const f64,
    h_im: *const f64,
    dim: usize,
    nabla: *mut f64,
    delta: *mut f64,
) -> LuStatus {
    guard(|| {
        let a = matrix(a_re, a_im, dim, "a_re")?;
        let h = vector(h_re, h_im, dim, "h_re")?;
        let r = hilbert_reduction_check(&a, &h)?;
        let (n, d) = (out_ref(nabla, "nabla")?, out_ref(delta, "delta")?);
        *n = r.nabla;
        *d = r.delta;
        Ok(())
    })
}

/// Seeded random instance. `mode` is an [`LuMode`] value; `p` is ignored in
/// Hilbert mode. `cloud_size` is the number of sample points per domain (at least 2).
///
/// # Safety
/// `out` must be writable; on success it receives a handle to free with [`lu_instance_free`].
#[no_mangle]
pub unsafe extern "C" fn lu_instance_generate(
    mode_value: u32,
    dim: usize,
    p: f64,
    cloud_size: usize,
    seed: u64,
    out: *mut *mut LuInstance,
) -> LuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = GenConfig { mode: mode(mode_value)?, dim, p: exponent(p)?, cloud_size };
        let inst = generate_instance(seed, &cfg)?;
        *out = Box::into_raw(Box::new(LuInstance(inst)));
        Ok(())
    })
}

/// Parses and validates an instance from JSON.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_instance_from_json(json: *const c_char, out: *mut *mut LuInstance) -> LuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inst: Instance = serde_json::from_str(c_str(json, "json")?).map_err(|e| fail(LuStatus::ParseError, e.to_string()))?;
        inst.validate()?;
        *out = Box::into_raw(Box::new(LuInstance(inst)));
        Ok(())
    })
}

/// Serializes an instance to JSON; free the result with [`lu_string_free`].
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_instance_to_json(inst: *const LuInstance, out: *mut *mut c_char) -> LuStatus {
    guard(|| {
        let inst = in_ref(inst, "inst")?;
        let out = out_ref(out, "out")?;
        let text = serde_json::to_string(&inst.0).map_err(|e| fail(LuStatus::InvalidArgument, e.to_string()))?;
        *out = owned_string(text)?;
        Ok(())
    })
}

/// Dimension of an instance, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lu_instance_dim(inst: *const LuInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.dim)
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` must come from this library and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lu_instance_free(inst: *mut LuInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Evaluates the chain on an instance. Estimated Lipschitz norms use
/// `refine_budget` refinement probes seeded by `seed`.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_chain_nhrs(
    inst: *const LuInstance,
    refine_budget: usize,
    seed: u64,
    out: *mut LuChainSummary,
) -> LuStatus {
    guard(|| {
        let inst = in_ref(inst, "inst")?;
        let out = out_ref(out, "out")?;
        let opts = ChainOptions { refine_budget, seed, ..ChainOptions::default() };
        let r = chain_nhrs(&inst.0, &opts)?;
        let term = |n: &str| r.term(n).expect("chain term");
        let nabla_exact = inst.0.f.is_linear() && inst.0.a.is_linear();
        *out = LuChainSummary {
            nabla: term("nabla"),
            delta: term("delta"),
            half_sum_squares: term("half_sum_squares"),
            quarter_square_sum: term("quarter_square_sum"),
            product: term("product"),
            middle_form: term("middle_form"),
            final_bound: term("final_bound"),
            min_slack: r.min_slack().unwrap_or(0.0),
            nabla_exact: nabla_exact as u32,
            status: chain_status(r.status()),
        };
        Ok(())
    })
}

/// Runs a seeded campaign. `p` is ignored in Hilbert mode; `workers == 0`
/// uses every core. The report does not depend on `workers`.
///
/// # Safety
/// `out` must be writable; on success it receives a handle to free with [`lu_report_free`].
#[no_mangle]
pub unsafe extern "C" fn lu_campaign_run(
    mode_value: u32,
    trials: u64,
    seed: u64,
    dim: usize,
    p: f64,
    refine_budget: usize,
    workers: usize,
    out: *mut *mut LuReport,
) -> LuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let mode = mode(mode_value)?;
        let p = if mode == Mode::Hilbert { NormSpec::L2 } else { exponent(p)? };
        let cfg = CampaignConfig { mode, trials, seed, dim, dim_max: dim, p, refine_budget, ..CampaignConfig::default() };
        let report = if workers == 0 { run_campaign(&cfg)? } else { run_campaign_with_workers(&cfg, workers)? };
        *out = Box::into_raw(Box::new(LuReport(report)));
        Ok(())
    })
}

/// Trial counts of a report.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_report_counts(report: *const LuReport, out: *mut LuCounts) -> LuStatus {
    guard(|| {
        let c = &in_ref(report, "report")?.0.counts;
        *out_ref(out, "out")? =
            LuCounts { passed: c.passed, empirical_negative: c.empirical_negative, violations: c.violations, skipped: c.skipped };
        Ok(())
    })
}

/// The report as JSON Lines (one line per trial, then a summary line);
/// free the result with [`lu_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_report_to_jsonl(report: *const LuReport, out: *mut *mut c_char) -> LuStatus {
    guard(|| {
        let report = in_ref(report, "report")?;
        let out = out_ref(out, "out")?;
        let mut buf = Vec::new();
        emit_report(&report.0, ReportFormat::Json, &mut buf)?;
        let text = String::from_utf8(buf).map_err(|e| fail(LuStatus::InvalidUtf8, e.to_string()))?;
        *out = owned_string(text)?;
        Ok(())
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from this library and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lu_report_free(report: *mut LuReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
