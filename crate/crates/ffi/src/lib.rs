//! C ABI over the `phosphene` library.
//!
//! Handles are opaque pointers created by `ph_*_load`/`ph_fit_*` and released
//! with the matching `*_free`. Every fallible call returns a [`PhStatus`]; on
//! failure, [`ph_last_error_message`] describes the most recent error on the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use phosphene::data::{Dataset, Grid, Stimulus};
use phosphene::metrics;
use phosphene::model::{fit_descriptive, FitConfig, FitResult, ModelKind};
use phosphene::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhStatus {
    Ok = 0,
    NullPointer = 1,
    Argument = 2,
    Format = 3,
    Data = 4,
    Parameter = 5,
    Fit = 6,
    DegenerateVariance = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhModel {
    Spectral = 0,
    Exponential = 1,
    Baseline = 2,
}

/// A loaded dataset.
pub struct PhDataset {
    inner: Dataset,
}

/// A fitted parameter set.
pub struct PhFit {
    inner: FitResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let msg = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> PhStatus {
    match e {
        Error::Format(_) => PhStatus::Format,
        Error::Data(_) => PhStatus::Data,
        Error::Argument(_) => PhStatus::Argument,
        Error::Parameter(_) => PhStatus::Parameter,
        Error::Fit(_) => PhStatus::Fit,
        Error::DegenerateVariance => PhStatus::DegenerateVariance,
        Error::Io(_) | Error::Json(_) => PhStatus::Io,
    }
}

struct Failure(PhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PhStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PhStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PhStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PhStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Message for the last failed call on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ph_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a dataset CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_dataset_load(path: *const c_char, out: *mut *mut PhDataset) -> PhStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(PhStatus::Argument, "path is not UTF-8".into()))?;
        let ds = phosphene::data::load_dataset(path)?;
        write_out(out, Box::into_raw(Box::new(PhDataset { inner: ds })), "out")
    })
}

/// Releases a dataset. Null is ignored.
///
/// # Safety
/// `ds` must come from [`ph_dataset_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ph_dataset_free(ds: *mut PhDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of trials in `ds`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ph_dataset_trial_count(ds: *const PhDataset, out: *mut usize) -> PhStatus {
    guard(|| write_out(out, as_ref(ds, "dataset")?.inner.len(), "out"))
}

/// Subject, pulse rate, duration and sample count of trial `index` (trials are sorted by subject, then condition).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ph_dataset_trial_info(
    ds: *const PhDataset,
    index: usize,
    subject_id: *mut u32,
    freq_pps: *mut f64,
    duration_s: *mut f64,
    n_samples: *mut usize,
) -> PhStatus {
    guard(|| {
        let ds = &as_ref(ds, "dataset")?.inner;
        let t = ds.trials().get(index).ok_or_else(|| {
            Failure(PhStatus::Argument, format!("trial index {index} out of range (have {})", ds.len()))
        })?;
        write_out(subject_id, t.subject_id, "subject_id")?;
        write_out(freq_pps, t.stimulus.freq_pps, "freq_pps")?;
        write_out(duration_s, t.stimulus.duration_s, "duration_s")?;
        write_out(n_samples, t.observed.len(), "n_samples")
    })
}

/// Fits one model to trial `index` on its own. `m` applies to the spectral model only.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ph_fit_descriptive(
    ds: *const PhDataset,
    index: usize,
    model: PhModel,
    m: usize,
    seed: u64,
    restarts: usize,
    out: *mut *mut PhFit,
) -> PhStatus {
    guard(|| {
        let ds = &as_ref(ds, "dataset")?.inner;
        let trial = ds
            .trials()
            .get(index)
            .ok_or_else(|| Failure(PhStatus::Argument, format!("trial index {index} out of range")))?;
        let kind = match model {
            PhModel::Spectral => ModelKind::Spectral { m },
            PhModel::Exponential => ModelKind::Exponential,
            PhModel::Baseline => ModelKind::Baseline,
        };
        let config = FitConfig { seed, restarts, ..Default::default() };
        let fit = fit_descriptive(kind, trial, &config)?;
        write_out(out, Box::into_raw(Box::new(PhFit { inner: fit })), "out")
    })
}

/// Releases a fit. Null is ignored.
///
/// # Safety
/// `fit` must come from a `ph_fit_*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ph_fit_free(fit: *mut PhFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Mean per-trial MSE at the fitted parameters.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ph_fit_objective(fit: *const PhFit, out: *mut f64) -> PhStatus {
    guard(|| write_out(out, as_ref(fit, "fit")?.inner.objective, "out"))
}

/// Writes the fitted parameters as NUL-terminated JSON into `buf`.
///
/// `needed` receives the required size including the NUL. With a null `buf`
/// or a too-small `capacity`, nothing is written and `BufferTooSmall` is
/// returned (null `buf` with a non-null `needed` is the size query).
///
/// # Safety
/// `buf` must hold `capacity` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn ph_fit_params_json(
    fit: *const PhFit,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> PhStatus {
    guard(|| {
        let fit = as_ref(fit, "fit")?;
        let json = serde_json::to_string(&fit.inner.params).map_err(Error::from)?;
        let size = json.len() + 1;
        if !needed.is_null() {
            needed.write(size);
        }
        if buf.is_null() || capacity < size {
            return Err(Failure(PhStatus::BufferTooSmall, format!("buffer needs {size} bytes")));
        }
        ptr::copy_nonoverlapping(json.as_ptr(), buf.cast::<u8>(), json.len());
        buf.add(json.len()).write(0);
        Ok(())
    })
}

/// Predicts brightness on the grid `0, dt, …, (n - 1)·dt` for the given stimulus.
///
/// # Safety
/// `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ph_fit_predict(
    fit: *const PhFit,
    freq_pps: f64,
    duration_s: f64,
    dt: f64,
    n: usize,
    out: *mut f64,
) -> PhStatus {
    guard(|| {
        let fit = as_ref(fit, "fit")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = Grid::new(0.0, dt, n)?;
        let stimulus = Stimulus::new(freq_pps, duration_s)?;
        let pred = fit.inner.params.predict(&stimulus, &grid)?;
        ptr::copy_nonoverlapping(pred.samples().as_ptr(), out, n);
        Ok(())
    })
}

/// Mean squared error of two length-`n` series.
///
/// # Safety
/// `a` and `b` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ph_mse(a: *const f64, b: *const f64, n: usize, out: *mut f64) -> PhStatus {
    guard(|| {
        let v = metrics::mse(slice(a, n, "a")?, slice(b, n, "b")?)?;
        write_out(out, v, "out")
    })
}

/// Pearson correlation of two length-`n` series; `DegenerateVariance` for constant input.
///
/// # Safety
/// `a` and `b` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ph_pearson_r(a: *const f64, b: *const f64, n: usize, out: *mut f64) -> PhStatus {
    guard(|| {
        let v = metrics::pearson_r(slice(a, n, "a")?, slice(b, n, "b")?)?;
        write_out(out, v, "out")
    })
}
