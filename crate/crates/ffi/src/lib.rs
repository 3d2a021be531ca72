//! C ABI over `regimelab`.
//!
//! Conventions:
//! - Every fallible function returns an [`RlStatus`]; `RL_STATUS_OK` is 0.
//!   The message of the last failure on the calling thread is available
//!   from [`rl_last_error_message`].
//! - Corpora and fits are opaque handles created by this library and
//!   released with the matching `*_free` function. Handles are immutable
//!   after creation and may be shared between threads for reading.
//! - Array outputs are written into caller-provided buffers together with a
//!   capacity; `RL_STATUS_BUFFER_TOO_SMALL` is returned when the capacity is
//!   short, and the required length is always reported.
//! - Strings returned by the library are NUL-terminated, owned by the caller
//!   and released with [`rl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use regimelab::{
    derivs_wrt_gap, finite_diff_check, fit_map, lambda_sweep, load_corpus, regime_probs, report, FitConfig,
    FitResult, Label, LabeledCorpus, ModelParams, OptimizerConfig, RegimeError, RegimeProbs, SensitivityBundle,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Parameter = 3,
    Kink = 4,
    Parse = 5,
    Schema = 6,
    Order = 7,
    Shape = 8,
    Numeric = 9,
    CalibrationUnavailable = 10,
    Io = 11,
    BufferTooSmall = 12,
    InvalidLabel = 13,
    Panic = 14,
}

/// Regime label codes used in label arrays.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlLabel {
    Np = 0,
    Fr = 1,
    Mn = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlModelParams {
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub tau_a: f64,
    pub tau_p: f64,
    pub kappa: f64,
    pub eps_p: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RlRegimeProbs {
    pub p_fr_lat: f64,
    pub p_mn_lat: f64,
    pub z_mn: f64,
    pub p_mn: f64,
    pub p_fr: f64,
    pub p_np: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RlSensitivity {
    pub d_p_np: f64,
    pub d_p_fr: f64,
    pub d_p_mn: f64,
    pub d2_p_fr: f64,
    pub d_p_fr_lat: f64,
    pub d_p_mn_lat: f64,
}

/// Flat mirror of the estimator configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlFitConfig {
    pub lambda: f64,
    pub beta_fixed: f64,
    pub tau_a_hat: f64,
    pub tau_p_hat: f64,
    pub lam_alpha: f64,
    pub lam_gamma: f64,
    pub lam_kappa: f64,
    pub gauge_w: f64,
    pub eps_p: f64,
    pub max_iterations: u64,
    pub gradient_tolerance: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RlObjective {
    pub neg_logpost: f64,
    pub neg_loglik: f64,
    pub pen_rw: f64,
    pub gauge_pen: f64,
    pub pen_l2: f64,
}

/// Fitted global parameters and optimizer outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RlFitSummary {
    pub alpha_hat: f64,
    pub gamma_hat: f64,
    pub kappa_hat: f64,
    pub converged: bool,
    pub iterations: u64,
}

/// Opaque labeled corpus.
pub struct RlCorpus(LabeledCorpus);

/// Opaque MAP fit.
pub struct RlFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &RegimeError) -> RlStatus {
    match e {
        RegimeError::Domain(_) => RlStatus::Domain,
        RegimeError::Parameter(_) => RlStatus::Parameter,
        RegimeError::Kink { .. } => RlStatus::Kink,
        RegimeError::Parse(_) => RlStatus::Parse,
        RegimeError::Schema { .. } => RlStatus::Schema,
        RegimeError::Order(_) => RlStatus::Order,
        RegimeError::Shape(_) => RlStatus::Shape,
        RegimeError::Numeric { .. } => RlStatus::Numeric,
        RegimeError::CalibrationUnavailable => RlStatus::CalibrationUnavailable,
        RegimeError::Io(_) => RlStatus::Io,
    }
}

struct Fail(RlStatus, String);

impl From<RegimeError> for Fail {
    fn from(e: RegimeError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RlStatus::NullPointer, format!("{what} is NULL"))
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            RlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RlStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copy `src` into `(buf, cap)` and report `src.len()` through `len_out`.
unsafe fn fill<T: Copy>(src: &[T], buf: *mut T, cap: usize, len_out: *mut usize) -> Result<(), Fail> {
    if !len_out.is_null() {
        *len_out = src.len();
    }
    if cap < src.len() {
        return Err(Fail(
            RlStatus::BufferTooSmall,
            format!("buffer holds {cap} elements, {} needed", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

fn string_out(s: String, dst: *mut *mut c_char) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(RlStatus::Shape, "string contains NUL".into()))?;
    // SAFETY: checked non-null by callers.
    unsafe { *dst = c.into_raw() };
    Ok(())
}

impl From<ModelParams> for RlModelParams {
    fn from(p: ModelParams) -> Self {
        Self { beta: p.beta, alpha: p.alpha, gamma: p.gamma, tau_a: p.tau_a, tau_p: p.tau_p, kappa: p.kappa, eps_p: p.eps_p }
    }
}

impl From<RlModelParams> for ModelParams {
    fn from(p: RlModelParams) -> Self {
        Self { beta: p.beta, alpha: p.alpha, gamma: p.gamma, tau_a: p.tau_a, tau_p: p.tau_p, kappa: p.kappa, eps_p: p.eps_p }
    }
}

impl From<RegimeProbs> for RlRegimeProbs {
    fn from(p: RegimeProbs) -> Self {
        Self { p_fr_lat: p.p_fr_lat, p_mn_lat: p.p_mn_lat, z_mn: p.z_mn, p_mn: p.p_mn, p_fr: p.p_fr, p_np: p.p_np }
    }
}

impl From<SensitivityBundle> for RlSensitivity {
    fn from(s: SensitivityBundle) -> Self {
        Self {
            d_p_np: s.d_p_np,
            d_p_fr: s.d_p_fr,
            d_p_mn: s.d_p_mn,
            d2_p_fr: s.d2_p_fr,
            d_p_fr_lat: s.d_p_fr_lat,
            d_p_mn_lat: s.d_p_mn_lat,
        }
    }
}

impl From<FitConfig> for RlFitConfig {
    fn from(c: FitConfig) -> Self {
        Self {
            lambda: c.lambda,
            beta_fixed: c.beta_fixed,
            tau_a_hat: c.tau_a_hat,
            tau_p_hat: c.tau_p_hat,
            lam_alpha: c.lam_alpha,
            lam_gamma: c.lam_gamma,
            lam_kappa: c.lam_kappa,
            gauge_w: c.gauge_w,
            eps_p: c.eps_p,
            max_iterations: c.optimizer.max_iterations as u64,
            gradient_tolerance: c.optimizer.gradient_tolerance,
            seed: c.optimizer.seed,
        }
    }
}

impl From<RlFitConfig> for FitConfig {
    fn from(c: RlFitConfig) -> Self {
        Self {
            lambda: c.lambda,
            beta_fixed: c.beta_fixed,
            tau_a_hat: c.tau_a_hat,
            tau_p_hat: c.tau_p_hat,
            lam_alpha: c.lam_alpha,
            lam_gamma: c.lam_gamma,
            lam_kappa: c.lam_kappa,
            gauge_w: c.gauge_w,
            eps_p: c.eps_p,
            optimizer: OptimizerConfig {
                max_iterations: usize::try_from(c.max_iterations).unwrap_or(usize::MAX),
                gradient_tolerance: c.gradient_tolerance,
                seed: c.seed,
            },
        }
    }
}

fn label_code(l: Label) -> RlLabel {
    match l {
        Label::Np => RlLabel::Np,
        Label::Fr => RlLabel::Fr,
        Label::Mn => RlLabel::Mn,
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn rl_model_params_default() -> RlModelParams {
    ModelParams::default().into()
}

#[no_mangle]
pub extern "C" fn rl_fit_config_default() -> RlFitConfig {
    FitConfig::default().into()
}

/// Clamped regime probabilities at `gap`.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_regime_probs(gap: f64, params: *const RlModelParams, out: *mut RlRegimeProbs) -> RlStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let o = self::out(out, "out")?;
        *o = regime_probs(gap, &(*p).into())?.into();
        Ok(())
    })
}

/// Analytic derivatives with respect to the gap.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_derivs_wrt_gap(gap: f64, params: *const RlModelParams, out: *mut RlSensitivity) -> RlStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let o = self::out(out, "out")?;
        *o = derivs_wrt_gap(gap, &(*p).into())?.into();
        Ok(())
    })
}

/// Largest relative error between analytic and finite-difference slopes.
///
/// # Safety
/// `params` and `rel_error` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_finite_diff_check(
    gap: f64,
    params: *const RlModelParams,
    step: f64,
    rel_error: *mut f64,
) -> RlStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let o = out(rel_error, "rel_error")?;
        *o = finite_diff_check(gap, &(*p).into(), step)?;
        Ok(())
    })
}

/// Parse a corpus from JSON bytes.
///
/// # Safety
/// `json` must point to `len` readable bytes; `corpus_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_corpus_load_json(json: *const u8, len: usize, corpus_out: *mut *mut RlCorpus) -> RlStatus {
    guard(|| {
        let o = out(corpus_out, "corpus_out")?;
        *o = ptr::null_mut();
        if json.is_null() && len > 0 {
            return Err(null("json"));
        }
        let bytes = if len == 0 { &[][..] } else { std::slice::from_raw_parts(json, len) };
        *o = Box::into_raw(Box::new(RlCorpus(load_corpus(bytes)?)));
        Ok(())
    })
}

/// Corpus with turns `1..=len` carrying the given label codes.
///
/// # Safety
/// `labels` must point to `len` readable `RlLabel` values (as `int`);
/// `corpus_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_corpus_from_labels(
    labels: *const i32,
    len: usize,
    corpus_out: *mut *mut RlCorpus,
) -> RlStatus {
    guard(|| {
        let o = out(corpus_out, "corpus_out")?;
        *o = ptr::null_mut();
        if labels.is_null() && len > 0 {
            return Err(null("labels"));
        }
        let codes = if len == 0 { &[][..] } else { std::slice::from_raw_parts(labels, len) };
        let labels = codes
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                0 => Ok(Label::Np),
                1 => Ok(Label::Fr),
                2 => Ok(Label::Mn),
                other => Err(Fail(RlStatus::InvalidLabel, format!("label code {other} at position {}", i + 1))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        *o = Box::into_raw(Box::new(RlCorpus(LabeledCorpus::from_labels(&labels)?)));
        Ok(())
    })
}

/// Number of turns; 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_corpus_len(corpus: *const RlCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.len())
}

/// Label codes in corpus order.
///
/// # Safety
/// `corpus` must be a live handle; `buf` must hold `cap` values; `len_out`
/// may be NULL.
#[no_mangle]
pub unsafe extern "C" fn rl_corpus_labels(
    corpus: *const RlCorpus,
    buf: *mut RlLabel,
    cap: usize,
    len_out: *mut usize,
) -> RlStatus {
    guard(|| {
        let c = deref(corpus, "corpus")?;
        let codes: Vec<RlLabel> = c.0.labels().into_iter().map(label_code).collect();
        fill(&codes, buf, cap, len_out)
    })
}

/// Original turn indices in corpus order.
///
/// # Safety
/// As for [`rl_corpus_labels`].
#[no_mangle]
pub unsafe extern "C" fn rl_corpus_turns(
    corpus: *const RlCorpus,
    buf: *mut u32,
    cap: usize,
    len_out: *mut usize,
) -> RlStatus {
    guard(|| fill(&deref(corpus, "corpus")?.0.turn_indices(), buf, cap, len_out))
}

/// Dynamics table (cumulative counts and sliding proportions) as CSV.
///
/// # Safety
/// `corpus` must be a live handle; `csv_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_corpus_dynamics_csv(corpus: *const RlCorpus, window: usize, csv_out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let c = deref(corpus, "corpus")?;
        let o = out(csv_out, "csv_out")?;
        *o = ptr::null_mut();
        string_out(regimelab::dynamics_csv(&c.0, window)?, o)
    })
}

/// # Safety
/// `corpus` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_corpus_free(corpus: *mut RlCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// MAP fit of the gap trajectory.
///
/// # Safety
/// `corpus` must be a live handle; `config` and `fit_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_map(corpus: *const RlCorpus, config: *const RlFitConfig, fit_out: *mut *mut RlFit) -> RlStatus {
    guard(|| {
        let c = deref(corpus, "corpus")?;
        let cfg = deref(config, "config")?;
        let o = out(fit_out, "fit_out")?;
        *o = ptr::null_mut();
        *o = Box::into_raw(Box::new(RlFit(fit_map(&c.0, &(*cfg).into())?)));
        Ok(())
    })
}

/// Number of fitted turns; 0 for NULL.
///
/// # Safety
/// `fit` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_len(fit: *const RlFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.gaps().len())
}

/// Fitted gap trajectory.
///
/// # Safety
/// `fit` must be a live handle; `buf` must hold `cap` values; `len_out`
/// may be NULL.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_trajectory(fit: *const RlFit, buf: *mut f64, cap: usize, len_out: *mut usize) -> RlStatus {
    guard(|| fill(deref(fit, "fit")?.0.gaps(), buf, cap, len_out))
}

/// Reconstructed per-turn probabilities.
///
/// # Safety
/// As for [`rl_fit_trajectory`].
#[no_mangle]
pub unsafe extern "C" fn rl_fit_probs(
    fit: *const RlFit,
    buf: *mut RlRegimeProbs,
    cap: usize,
    len_out: *mut usize,
) -> RlStatus {
    guard(|| {
        let f = deref(fit, "fit")?;
        let probs: Vec<RlRegimeProbs> = f.0.probs.iter().map(|p| (*p).into()).collect();
        fill(&probs, buf, cap, len_out)
    })
}

/// Per-turn sensitivities along the fitted trajectory.
///
/// # Safety
/// As for [`rl_fit_trajectory`].
#[no_mangle]
pub unsafe extern "C" fn rl_fit_sensitivities(
    fit: *const RlFit,
    buf: *mut RlSensitivity,
    cap: usize,
    len_out: *mut usize,
) -> RlStatus {
    guard(|| {
        let f = deref(fit, "fit")?;
        let sens: Vec<RlSensitivity> =
            regimelab::trajectory_sensitivities(&f.0).into_iter().map(Into::into).collect();
        fill(&sens, buf, cap, len_out)
    })
}

/// # Safety
/// `fit` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_objective(fit: *const RlFit, out: *mut RlObjective) -> RlStatus {
    guard(|| {
        let o = &deref(fit, "fit")?.0.objective;
        *self::out(out, "out")? = RlObjective {
            neg_logpost: o.neg_logpost,
            neg_loglik: o.neg_loglik,
            pen_rw: o.pen_rw,
            gauge_pen: o.gauge_pen,
            pen_l2: o.pen_l2,
        };
        Ok(())
    })
}

/// # Safety
/// `fit` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_summary(fit: *const RlFit, out: *mut RlFitSummary) -> RlStatus {
    guard(|| {
        let f = &deref(fit, "fit")?.0;
        *self::out(out, "out")? = RlFitSummary {
            alpha_hat: f.params_hat.alpha_hat,
            gamma_hat: f.params_hat.gamma_hat,
            kappa_hat: f.params_hat.kappa_hat,
            converged: f.converged,
            iterations: f.iterations as u64,
        };
        Ok(())
    })
}

/// Fit serialized as JSON, floats at 12 significant digits.
///
/// # Safety
/// `fit` must be a live handle; `json_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_to_json(fit: *const RlFit, json_out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let f = deref(fit, "fit")?;
        let o = out(json_out, "json_out")?;
        *o = ptr::null_mut();
        string_out(report::fit_json(&f.0), o)
    })
}

/// Trajectory table (`position,turn,label,G_hat,p_*,d_*`) as CSV.
///
/// # Safety
/// `fit` must be a live handle; `csv_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_trajectory_csv(fit: *const RlFit, csv_out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let f = deref(fit, "fit")?;
        let o = out(csv_out, "csv_out")?;
        *o = ptr::null_mut();
        string_out(report::trajectory_csv(&f.0), o)
    })
}

/// # Safety
/// `fit` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_free(fit: *mut RlFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Warm-started sweep over an ascending `grid`. Writes `n - 1` adjacent
/// RMSE values to `adj_rmse` and `n` calibration values to `mn_calibration`
/// (NaN where undefined), then the selected `λ` to `selected`. Returns
/// `RL_STATUS_CALIBRATION_UNAVAILABLE` after filling the arrays when the
/// corpus has no MN turns.
///
/// # Safety
/// `corpus` must be a live handle; `grid` must hold `n` values,
/// `adj_rmse` `n - 1` and `mn_calibration` `n`; `config` and `selected`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_lambda_sweep(
    corpus: *const RlCorpus,
    config: *const RlFitConfig,
    grid: *const f64,
    n: usize,
    adj_rmse: *mut f64,
    mn_calibration: *mut f64,
    selected: *mut f64,
) -> RlStatus {
    guard(|| {
        let c = deref(corpus, "corpus")?;
        let cfg = deref(config, "config")?;
        if grid.is_null() || adj_rmse.is_null() || mn_calibration.is_null() {
            return Err(null("grid or output array"));
        }
        let sel = out(selected, "selected")?;
        let grid = std::slice::from_raw_parts(grid, n);
        let sweep = lambda_sweep(&c.0, &(*cfg).into(), grid)?;
        ptr::copy_nonoverlapping(sweep.adj_rmse.as_ptr(), adj_rmse, sweep.adj_rmse.len());
        let cal: Vec<f64> = sweep.mn_calibration.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        ptr::copy_nonoverlapping(cal.as_ptr(), mn_calibration, cal.len());
        match sweep.selected_lambda {
            Some(l) => {
                *sel = l;
                Ok(())
            }
            None => {
                *sel = f64::NAN;
                Err(RegimeError::CalibrationUnavailable.into())
            }
        }
    })
}

/// Convenience for C callers that hold a path.
///
/// # Safety
/// `path` must be a NUL-terminated string; `corpus_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_corpus_load_file(path: *const c_char, corpus_out: *mut *mut RlCorpus) -> RlStatus {
    guard(|| {
        let o = out(corpus_out, "corpus_out")?;
        *o = ptr::null_mut();
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(RlStatus::Parameter, "path is not UTF-8".into()))?;
        let bytes = std::fs::read(path).map_err(RegimeError::from)?;
        *o = Box::into_raw(Box::new(RlCorpus(load_corpus(&bytes)?)));
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_map_errors() {
        assert_eq!(status_of(&RegimeError::CalibrationUnavailable), RlStatus::CalibrationUnavailable);
        assert_eq!(status_of(&RegimeError::Kink { gap: 0.0, step: 1e-5 }), RlStatus::Kink);
    }

    #[test]
    fn config_round_trip() {
        let c = FitConfig::default();
        assert_eq!(FitConfig::from(RlFitConfig::from(c)), c);
        let p = ModelParams::default();
        assert_eq!(ModelParams::from(RlModelParams::from(p)), p);
    }

    #[test]
    fn error_message_is_thread_local() {
        let p = rl_model_params_default();
        let mut o = RlRegimeProbs::default();
        assert_eq!(unsafe { rl_regime_probs(f64::NAN, &p, &mut o) }, RlStatus::Domain);
        let here = unsafe { CStr::from_ptr(rl_last_error_message()) }.to_string_lossy().into_owned();
        assert!(here.contains("finite"));
        let there = std::thread::spawn(|| unsafe { CStr::from_ptr(rl_last_error_message()) }.to_string_lossy().into_owned())
            .join()
            .unwrap();
        assert!(there.is_empty());
    }
}
