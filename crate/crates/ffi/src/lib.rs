//! C ABI for `covthresh`.
//!
//! Matrices and observation tables cross the boundary as opaque handles
//! created by `ct_*_new` functions and released with the matching
//! `ct_*_free`. Every fallible function returns a [`CtStatus`]; on failure
//! [`ct_last_error`] describes the problem for the calling thread.
//!
//! Dense arrays are row-major `double`s. Missing observations are NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use covthresh::estimators::{
    band, ledoit_wolf_fit, pairwise_covariance, sample_covariance, threshold, ObsMatrix,
    ThresholdSpec,
};
use covthresh::matcore::{frobenius_norm, one_norm, operator_norm, sym_eigenvalues, SymMatrix};
use covthresh::selection::{
    default_threshold_grid, full_band_grid, select, Regularizer, SplitRule, SplitScheme, TuningGrid,
};
use covthresh::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotSymmetric = 4,
    NonFinite = 5,
    NotPositiveDefinite = 6,
    NoConvergence = 7,
    MissingData = 8,
    TooFewSamples = 9,
    InsufficientOverlap = 10,
    BufferTooSmall = 11,
    Internal = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtNorm {
    /// Maximum absolute column sum.
    One = 0,
    Frobenius = 1,
    /// Largest absolute eigenvalue.
    Operator = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtRegularizer {
    Threshold = 0,
    Band = 1,
}

/// Symmetric matrix handle.
pub struct CtMatrix {
    inner: SymMatrix,
}

/// Observation table handle (`n` rows, `p` columns).
pub struct CtObs {
    inner: ObsMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CtStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::DimensionTooSmall { .. } => {
            CtStatus::DimensionMismatch
        }
        Error::Asymmetric { .. } => CtStatus::NotSymmetric,
        Error::NonFinite { .. } => CtStatus::NonFinite,
        Error::NotPositiveDefinite(_) => CtStatus::NotPositiveDefinite,
        Error::NoConvergence { .. } => CtStatus::NoConvergence,
        Error::MissingData => CtStatus::MissingData,
        Error::TooFewSamples { .. } => CtStatus::TooFewSamples,
        Error::InsufficientOverlap { .. } => CtStatus::InsufficientOverlap,
        _ => CtStatus::InvalidArgument,
    }
}

struct Failure(CtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CtStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CtStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CtStatus::Internal
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn matrix_ref<'a>(m: *const CtMatrix) -> Result<&'a SymMatrix, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("matrix"))
}

unsafe fn obs_ref<'a>(x: *const CtObs) -> Result<&'a ObsMatrix, Failure> {
    x.as_ref()
        .map(|x| &x.inner)
        .ok_or_else(|| null("observations"))
}

unsafe fn emit_matrix(out: *mut *mut CtMatrix, m: SymMatrix) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(CtMatrix { inner: m }));
    Ok(())
}

unsafe fn write_f64(out: *mut f64, v: f64) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = v;
    Ok(())
}

/// Message describing the last failure on this thread; empty after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies an `n x p` row-major table; NaN marks a missing entry.
///
/// # Safety
/// `data` must point to `n * p` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_obs_new(
    data: *const f64,
    n: usize,
    p: usize,
    out: *mut *mut CtObs,
) -> CtStatus {
    guard(|| {
        let len = n
            .checked_mul(p)
            .ok_or_else(|| Failure(CtStatus::InvalidArgument, "n * p overflows".into()))?;
        let values = slice(data, len, "data")?.to_vec();
        let inner = ObsMatrix::from_flat_with_missing(n, p, values)?;
        if out.is_null() {
            return Err(null("output handle"));
        }
        *out = Box::into_raw(Box::new(CtObs { inner }));
        Ok(())
    })
}

/// # Safety
/// `x` must be null or a handle from [`ct_obs_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ct_obs_free(x: *mut CtObs) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// # Safety
/// `x` must be a live handle; `n` and `p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_obs_dims(x: *const CtObs, n: *mut usize, p: *mut usize) -> CtStatus {
    guard(|| {
        let x = obs_ref(x)?;
        if n.is_null() || p.is_null() {
            return Err(null("output pointer"));
        }
        *n = x.n();
        *p = x.p();
        Ok(())
    })
}

/// Copies a full `p x p` row-major matrix, which must be exactly symmetric.
///
/// # Safety
/// `data` must point to `p * p` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_matrix_new(
    data: *const f64,
    p: usize,
    out: *mut *mut CtMatrix,
) -> CtStatus {
    guard(|| {
        let len = p
            .checked_mul(p)
            .ok_or_else(|| Failure(CtStatus::InvalidArgument, "p * p overflows".into()))?;
        let values = slice(data, len, "data")?;
        if p == 0 {
            return Err(Failure(
                CtStatus::InvalidArgument,
                "p must be positive".into(),
            ));
        }
        let rows: Vec<Vec<f64>> = values.chunks(p).map(<[f64]>::to_vec).collect();
        emit_matrix(out, SymMatrix::from_rows(&rows)?)
    })
}

/// # Safety
/// `m` must be null or a handle returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ct_matrix_free(m: *mut CtMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of `m`, or 0 when `m` is null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_matrix_dim(m: *const CtMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// Copies all `p * p` entries row-major into `out` (capacity `len`).
///
/// # Safety
/// `m` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_matrix_copy(m: *const CtMatrix, out: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        let src = m.as_slice();
        if len < src.len() {
            return Err(Failure(
                CtStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", src.len()),
            ));
        }
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
        Ok(())
    })
}

/// Sample covariance with divisor `n`; fails on missing data.
///
/// # Safety
/// `x` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_sample_covariance(
    x: *const CtObs,
    out: *mut *mut CtMatrix,
) -> CtStatus {
    guard(|| emit_matrix(out, sample_covariance(obs_ref(x)?)?))
}

/// Covariance from pairwise-complete rows.
///
/// # Safety
/// `x` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_pairwise_covariance(
    x: *const CtObs,
    out: *mut *mut CtMatrix,
) -> CtStatus {
    guard(|| emit_matrix(out, pairwise_covariance(obs_ref(x)?)?))
}

/// Ledoit-Wolf shrinkage towards a scaled identity. `intensity` may be
/// null; otherwise it receives the shrinkage weight in `[0, 1]`.
///
/// # Safety
/// `x` must be a live handle, `out` writable, `intensity` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ct_ledoit_wolf(
    x: *const CtObs,
    out: *mut *mut CtMatrix,
    intensity: *mut f64,
) -> CtStatus {
    guard(|| {
        let fit = ledoit_wolf_fit(obs_ref(x)?)?;
        if !intensity.is_null() {
            *intensity = fit.intensity;
        }
        emit_matrix(out, fit.estimate)
    })
}

/// Hard thresholding: entries with `|m_ij| < s` become zero. A nonzero
/// `keep_diagonal` leaves the diagonal untouched.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_threshold(
    m: *const CtMatrix,
    s: f64,
    keep_diagonal: i32,
    out: *mut *mut CtMatrix,
) -> CtStatus {
    guard(|| {
        let spec = ThresholdSpec::new(s, keep_diagonal != 0)?;
        emit_matrix(out, threshold(matrix_ref(m)?, spec))
    })
}

/// Keeps entries with `|i - j| <= k`.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_band(
    m: *const CtMatrix,
    k: usize,
    out: *mut *mut CtMatrix,
) -> CtStatus {
    guard(|| emit_matrix(out, band(matrix_ref(m)?, k)))
}

/// Descending eigenvalues into `out` (capacity `len >= p`).
///
/// # Safety
/// `m` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ct_eigenvalues(m: *const CtMatrix, out: *mut f64, len: usize) -> CtStatus {
    guard(|| {
        let values = sym_eigenvalues(matrix_ref(m)?)?;
        if len < values.len() {
            return Err(Failure(
                CtStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", values.len()),
            ));
        }
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ct_norm(m: *const CtMatrix, which: CtNorm, out: *mut f64) -> CtStatus {
    guard(|| {
        let m = matrix_ref(m)?;
        let v = match which {
            CtNorm::One => one_norm(m),
            CtNorm::Frobenius => frobenius_norm(m),
            CtNorm::Operator => operator_norm(m)?,
        };
        write_f64(out, v)
    })
}

/// Chooses a threshold or band width by random sample splitting.
///
/// `grid` may be null (with `grid_len == 0`) to use the default grid: every
/// band width, or thresholds in steps of `sqrt(ln p / n) / subdivisions`.
/// `train_fraction <= 0` sizes the second half as `n / ln n`; otherwise the
/// first half holds that fraction of the rows.
///
/// # Safety
/// `x` must be a live handle, `grid` must hold `grid_len` readable doubles
/// and `chosen` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_select(
    x: *const CtObs,
    kind: CtRegularizer,
    grid: *const f64,
    grid_len: usize,
    subdivisions: usize,
    n_splits: usize,
    train_fraction: f64,
    seed: u64,
    chosen: *mut f64,
) -> CtStatus {
    guard(|| {
        let x = obs_ref(x)?;
        let reg = match kind {
            CtRegularizer::Threshold => Regularizer::Threshold,
            CtRegularizer::Band => Regularizer::Band,
        };
        let grid = if grid_len > 0 {
            TuningGrid::from_points(slice(grid, grid_len, "grid")?.to_vec(), reg)?
        } else {
            match reg {
                Regularizer::Threshold => default_threshold_grid(x, subdivisions.max(1))?,
                Regularizer::Band => full_band_grid(x.p())?,
            }
        };
        let rule = if train_fraction > 0.0 {
            SplitRule::TrainFraction {
                fraction: train_fraction,
            }
        } else {
            SplitRule::LogN
        };
        let scheme = SplitScheme::from_rule(rule, x.n(), n_splits, seed)?;
        write_f64(chosen, select(x, &grid, &scheme)?.chosen)
    })
}
