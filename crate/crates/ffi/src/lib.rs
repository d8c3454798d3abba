//! C ABI over `robust_ssalt`.
//!
//! Plans and fits are opaque heap handles released with their `_free`
//! functions. Every fallible call returns an [`RssaltStatus`]; on failure the
//! message is available from [`rssalt_last_error`] on the same thread until
//! the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use robust_ssalt::dpd::{fit, FitConfig, FitResult};
use robust_ssalt::lifetime::{characteristic_ci, Characteristic};
use robust_ssalt::model::cell_probabilities;
use robust_ssalt::wald::{wald_statistic_at, LinearConstraint, DEFAULT_LEVELS};
use robust_ssalt::{Error, IntervalData, ModelParams, StressPlan};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RssaltStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Data = 3,
    Estimation = 4,
    Numeric = 5,
    Config = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RssaltCharacteristic {
    /// `arg` is the mission time.
    Reliability = 0,
    /// `arg` is the reliability level.
    Quantile = 1,
    /// `arg` is ignored.
    Mean = 2,
}

/// Point estimate with both interval families.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RssaltInterval {
    pub value: f64,
    pub std_error: f64,
    pub direct_lo: f64,
    pub direct_hi: f64,
    pub transformed_lo: f64,
    pub transformed_hi: f64,
}

/// Opaque stress plan.
pub struct RssaltPlan {
    plan: StressPlan,
}

/// Opaque fit result.
pub struct RssaltFit {
    fit: FitResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RssaltStatus {
    match e {
        Error::InvalidInput(_) => RssaltStatus::InvalidInput,
        Error::Data(_) => RssaltStatus::Data,
        Error::Estimation(_) => RssaltStatus::Estimation,
        Error::NonFinite(_) | Error::Singular(_) | Error::Domain(_) => RssaltStatus::Numeric,
        Error::Config(_) => RssaltStatus::Config,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), (RssaltStatus, String)>>(f: F) -> RssaltStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RssaltStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            RssaltStatus::Panic
        }
    }
}

fn lib<T>(r: robust_ssalt::Result<T>) -> Result<T, (RssaltStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RssaltStatus, String) {
    (RssaltStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (RssaltStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rssalt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a plan. `change_times` has one entry per level, the last being the
/// termination time; every change time must also be an inspection time.
///
/// # Safety
/// Array arguments must point to the stated number of doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rssalt_plan_new(
    levels: *const f64,
    n_levels: usize,
    change_times: *const f64,
    n_change_times: usize,
    inspection_times: *const f64,
    n_inspections: usize,
    out: *mut *mut RssaltPlan,
) -> RssaltStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let x = input(levels, n_levels, "levels")?.to_vec();
        let tau = input(change_times, n_change_times, "change_times")?.to_vec();
        let it = input(inspection_times, n_inspections, "inspection_times")?.to_vec();
        let plan = lib(StressPlan::new(x, tau, it))?;
        *out = Box::into_raw(Box::new(RssaltPlan { plan }));
        Ok(())
    })
}

/// # Safety
/// `plan` must be null or come from [`rssalt_plan_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rssalt_plan_free(plan: *mut RssaltPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Number of cells, `L + 1`; 0 for a null plan.
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rssalt_plan_n_cells(plan: *const RssaltPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.plan.n_cells())
}

/// Writes the `L + 1` cell probabilities at θ = (a0, a1, eta) into `out`.
///
/// # Safety
/// `plan` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rssalt_cell_probabilities(
    plan: *const RssaltPlan,
    a0: f64,
    a1: f64,
    eta: f64,
    out: *mut f64,
    len: usize,
) -> RssaltStatus {
    guard(|| {
        let p = plan.as_ref().ok_or_else(|| null("plan"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != p.plan.n_cells() {
            return Err((RssaltStatus::InvalidInput, format!("out must hold {} values, got {len}", p.plan.n_cells())));
        }
        let theta = lib(ModelParams::new(a0, a1, eta))?;
        let pi = lib(cell_probabilities(&theta, &p.plan))?;
        slice::from_raw_parts_mut(out, len).copy_from_slice(&pi);
        Ok(())
    })
}

/// Fits the MDPDE with tuning parameter `beta` to `L + 1` counts (last =
/// survivors). A fit that ran but did not converge is still returned; check
/// [`rssalt_fit_converged`].
///
/// # Safety
/// `plan` must be a live handle, `counts` must hold `len` values and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn rssalt_fit(
    plan: *const RssaltPlan,
    counts: *const u64,
    len: usize,
    beta: f64,
    out: *mut *mut RssaltFit,
) -> RssaltStatus {
    guard(|| {
        let p = plan.as_ref().ok_or_else(|| null("plan"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = input(counts, len, "counts")?.to_vec();
        let data = lib(IntervalData::for_plan(c, &p.plan))?;
        let f = lib(fit(&p.plan, &data, &FitConfig::with_beta(beta)))?;
        *out = Box::into_raw(Box::new(RssaltFit { fit: f }));
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or come from [`rssalt_fit`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rssalt_fit_free(fit: *mut RssaltFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// 1 when converged, 0 otherwise or for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rssalt_fit_converged(fit: *const RssaltFit) -> i32 {
    fit.as_ref().map_or(0, |f| f.fit.converged as i32)
}

/// Writes (a0, a1, eta).
///
/// # Safety
/// `fit` must be a live handle and `out` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn rssalt_fit_params(fit: *const RssaltFit, out: *mut f64) -> RssaltStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        slice::from_raw_parts_mut(out, 3).copy_from_slice(&f.fit.params.to_array());
        Ok(())
    })
}

/// Writes `Var(θ̂) = Σ/N` row-major into 9 doubles.
///
/// # Safety
/// `fit` must be a live handle and `out` must hold 9 doubles.
#[no_mangle]
pub unsafe extern "C" fn rssalt_fit_covariance(fit: *const RssaltFit, out: *mut f64) -> RssaltStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        slice::from_raw_parts_mut(out, 9).copy_from_slice(&f.fit.variance().to_flat());
        Ok(())
    })
}

/// Lifetime characteristic at normalized stress `x0` with intervals at
/// level `confidence`.
///
/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rssalt_characteristic(
    fit: *const RssaltFit,
    kind: RssaltCharacteristic,
    arg: f64,
    x0: f64,
    confidence: f64,
    out: *mut RssaltInterval,
) -> RssaltStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let kind = match kind {
            RssaltCharacteristic::Reliability => Characteristic::Reliability { t: arg },
            RssaltCharacteristic::Quantile => Characteristic::Quantile { q: arg },
            RssaltCharacteristic::Mean => Characteristic::Mean,
        };
        let e = lib(characteristic_ci(&f.fit, x0, kind, confidence))?;
        *out = RssaltInterval {
            value: e.value,
            std_error: e.std_error,
            direct_lo: e.ci_direct.0,
            direct_hi: e.ci_direct.1,
            transformed_lo: e.ci_transformed.0,
            transformed_hi: e.ci_transformed.1,
        };
        Ok(())
    })
}

/// Reliability at mission time `t`, shorthand for [`rssalt_characteristic`].
///
/// # Safety
/// As for [`rssalt_characteristic`].
#[no_mangle]
pub unsafe extern "C" fn rssalt_reliability(
    fit: *const RssaltFit,
    x0: f64,
    t: f64,
    confidence: f64,
    out: *mut RssaltInterval,
) -> RssaltStatus {
    rssalt_characteristic(fit, RssaltCharacteristic::Reliability, t, x0, confidence, out)
}

/// Wald-type test of `C θ = d`, with `rows` holding `n_rows` groups of
/// `c0, c1, c2, d`.
///
/// # Safety
/// `fit` must be a live handle, `rows` must hold `4 * n_rows` doubles and
/// both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rssalt_wald_linear(
    fit: *const RssaltFit,
    rows: *const f64,
    n_rows: usize,
    statistic: *mut f64,
    p_value: *mut f64,
) -> RssaltStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null("fit"))?;
        if statistic.is_null() || p_value.is_null() {
            return Err(null("output"));
        }
        let v = input(rows, 4 * n_rows, "rows")?;
        let rows = v.chunks(4).map(|r| ([r[0], r[1], r[2]], r[3])).collect();
        let c = lib(LinearConstraint::from_rows(rows))?;
        let r = lib(wald_statistic_at(&f.fit.params, &f.fit.covariance, f.fit.n_total, &c, &DEFAULT_LEVELS))?;
        *statistic = r.statistic;
        *p_value = r.p_value;
        Ok(())
    })
}
