//! C interface to `f2b-core`.
//!
//! Every fallible function returns an [`F2bStatus`]; on failure the message
//! is available from [`f2b_last_error_message`] on the same thread. Datasets
//! and models are opaque handles owned by the caller and released with the
//! matching `_free` function. Strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use f2b_core::svr::{load_model, save_model, train, KernelSpec, SvrHyperParams};
use f2b_core::{BmiCategory, Dataset, Error, SvrModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F2bStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or an argument out of range.
    InvalidArgument = 1,
    Domain = 2,
    Parse = 3,
    Integrity = 4,
    Format = 5,
    Corrupt = 6,
    Validation = 7,
    Convergence = 8,
    Capacity = 9,
    UndefinedCorrelation = 10,
    Io = 11,
    /// A Rust panic was caught at the boundary.
    Internal = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F2bKernel {
    Linear = 0,
    Rbf = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F2bBmiCategory {
    Underweight = 0,
    Normal = 1,
    Overweight = 2,
    ModeratelyObese = 3,
    SeverelyObese = 4,
    VerySeverelyObese = 5,
}

impl From<BmiCategory> for F2bBmiCategory {
    fn from(c: BmiCategory) -> Self {
        match c {
            BmiCategory::Underweight => Self::Underweight,
            BmiCategory::Normal => Self::Normal,
            BmiCategory::Overweight => Self::Overweight,
            BmiCategory::ModeratelyObese => Self::ModeratelyObese,
            BmiCategory::SeverelyObese => Self::SeverelyObese,
            BmiCategory::VerySeverelyObese => Self::VerySeverelyObese,
        }
    }
}

/// Opaque joined dataset.
pub struct F2bDataset(Dataset);

/// Opaque trained model.
pub struct F2bModel(SvrModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> F2bStatus {
    match e {
        Error::Domain { .. } => F2bStatus::Domain,
        Error::Parse { .. } | Error::Csv(_) => F2bStatus::Parse,
        Error::Integrity(_) => F2bStatus::Integrity,
        Error::Format(_) | Error::Json(_) => F2bStatus::Format,
        Error::Corrupt(_) => F2bStatus::Corrupt,
        Error::Validation(_) => F2bStatus::Validation,
        Error::Convergence { .. } => F2bStatus::Convergence,
        Error::Capacity(_) => F2bStatus::Capacity,
        Error::UndefinedCorrelation(_) => F2bStatus::UndefinedCorrelation,
        Error::Io { .. } => F2bStatus::Io,
    }
}

struct Fail(F2bStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(F2bStatus::InvalidArgument, msg.to_string())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> F2bStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            F2bStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            F2bStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{name} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| invalid(&format!("{name} is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn f2b_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn f2b_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out_bmi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn f2b_compute_bmi(
    weight_kg: f64,
    height_m: f64,
    out_bmi: *mut f64,
) -> F2bStatus {
    guard(|| {
        let out = out_arg(out_bmi, "out_bmi")?;
        *out = f2b_core::compute_bmi(weight_kg, height_m)?;
        Ok(())
    })
}

/// # Safety
/// `out_category` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn f2b_categorize(bmi: f64, out_category: *mut F2bBmiCategory) -> F2bStatus {
    guard(|| {
        let out = out_arg(out_category, "out_category")?;
        *out = f2b_core::categorize(bmi)?.into();
        Ok(())
    })
}

/// Exact binomial test of `k` successes in `n` trials against `p0`.
///
/// # Safety
/// Both output pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn f2b_binomial_test(
    k: u64,
    n: u64,
    p0: f64,
    out_p_one_sided: *mut f64,
    out_p_two_sided: *mut f64,
) -> F2bStatus {
    guard(|| {
        let one = out_arg(out_p_one_sided, "out_p_one_sided")?;
        let two = out_arg(out_p_two_sided, "out_p_two_sided")?;
        let t = f2b_core::audit::binomial_test(k, n, p0)?;
        *one = t.p_one_sided;
        *two = t.p_two_sided;
        Ok(())
    })
}

/// # Safety
/// `xs` and `ys` must each point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn f2b_pearson(
    xs: *const f64,
    ys: *const f64,
    len: usize,
    out_r: *mut f64,
) -> F2bStatus {
    guard(|| {
        let out = out_arg(out_r, "out_r")?;
        *out = f2b_core::eval::pearson(slice_arg(xs, len, "xs")?, slice_arg(ys, len, "ys")?)?;
        Ok(())
    })
}

/// Loads and joins a metadata CSV and an F2BE embeddings file.
///
/// # Safety
/// Paths must be NUL-terminated; `out_dataset` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn f2b_dataset_load(
    metadata_path: *const c_char,
    embeddings_path: *const c_char,
    normalize: bool,
    out_dataset: *mut *mut F2bDataset,
) -> F2bStatus {
    guard(|| {
        let out = out_arg(out_dataset, "out_dataset")?;
        *out = ptr::null_mut();
        let meta = str_arg(metadata_path, "metadata_path")?;
        let emb = str_arg(embeddings_path, "embeddings_path")?;
        let (ds, _) = f2b_core::load_dataset(meta, emb, normalize)?;
        *out = Box::into_raw(Box::new(F2bDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from [`f2b_dataset_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn f2b_dataset_free(dataset: *mut F2bDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn f2b_dataset_len(dataset: *const F2bDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// Embedding dimension, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn f2b_dataset_dim(dataset: *const F2bDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.dim())
}

/// Trains an epsilon-SVR on the listed record ids, or on every record when
/// `ids` is null. A non-positive `gamma` selects `1/dim` for RBF.
///
/// # Safety
/// `dataset` must be a live handle; `ids`, if non-null, must point to
/// `n_ids` NUL-terminated strings; `out_model` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn f2b_model_train(
    dataset: *const F2bDataset,
    ids: *const *const c_char,
    n_ids: usize,
    kernel: F2bKernel,
    gamma: f64,
    c: f64,
    epsilon: f64,
    tolerance: f64,
    out_model: *mut *mut F2bModel,
) -> F2bStatus {
    guard(|| {
        let out = out_arg(out_model, "out_model")?;
        *out = ptr::null_mut();
        let ds = &dataset
            .as_ref()
            .ok_or_else(|| invalid("dataset is null"))?
            .0;
        let ids: Vec<String> = if ids.is_null() {
            ds.record_ids().map(str::to_string).collect()
        } else {
            slice_arg(ids, n_ids, "ids")?
                .iter()
                .map(|&p| str_arg(p, "ids[i]").map(str::to_string))
                .collect::<Result<_, _>>()?
        };
        let spec = match kernel {
            F2bKernel::Linear => KernelSpec::linear(),
            F2bKernel::Rbf if gamma > 0.0 => KernelSpec::rbf(gamma)?,
            F2bKernel::Rbf => KernelSpec::rbf_default(ds.dim())?,
        };
        let params = SvrHyperParams {
            c,
            epsilon,
            tolerance,
            max_passes: None,
        };
        *out = Box::into_raw(Box::new(F2bModel(train(ds, &ids, spec, params)?)));
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out_model` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn f2b_model_load(
    path: *const c_char,
    out_model: *mut *mut F2bModel,
) -> F2bStatus {
    guard(|| {
        let out = out_arg(out_model, "out_model")?;
        *out = ptr::null_mut();
        *out = Box::into_raw(Box::new(F2bModel(load_model(str_arg(path, "path")?)?)));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn f2b_model_save(model: *const F2bModel, path: *const c_char) -> F2bStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| invalid("model is null"))?.0;
        save_model(str_arg(path, "path")?, m)?;
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn f2b_model_free(model: *mut F2bModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of support vectors, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn f2b_model_support_len(model: *const F2bModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.support.len())
}

/// Predicts from a vector already in the model's feature space.
///
/// # Safety
/// `x` must point to `len` readable doubles and `out_bmi` be writable.
#[no_mangle]
pub unsafe extern "C" fn f2b_model_predict(
    model: *const F2bModel,
    x: *const f64,
    len: usize,
    out_bmi: *mut f64,
) -> F2bStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| invalid("model is null"))?.0;
        let out = out_arg(out_bmi, "out_bmi")?;
        *out = m.predict(slice_arg(x, len, "x")?)?;
        Ok(())
    })
}

/// Predicts from a raw embedding, normalizing it if the model expects that.
///
/// # Safety
/// `x` must point to `len` readable floats and `out_bmi` be writable.
#[no_mangle]
pub unsafe extern "C" fn f2b_model_predict_raw(
    model: *const F2bModel,
    x: *const f32,
    len: usize,
    out_bmi: *mut f64,
) -> F2bStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| invalid("model is null"))?.0;
        let out = out_arg(out_bmi, "out_bmi")?;
        *out = m.predict_raw(slice_arg(x, len, "x")?)?;
        Ok(())
    })
}
