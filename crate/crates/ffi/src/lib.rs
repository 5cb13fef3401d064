//! C interface to the `transbox` library.
//!
//! Every function returns a [`TbStatus`]. On failure a message describing
//! the error is kept per thread and can be read with
//! [`tb_last_error_message`]. Handles are opaque and must be released with
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use transbox::evaluation::{check_signature, score, ScoreConfig};
use transbox::geometry::Norm;
use transbox::model::{load_checkpoint, save_checkpoint, soundness_report, Checkpoint, TrainingMetadata};
use transbox::ontology::{parse_concept, parse_ontology, Ontology};
use transbox::training::{mean_axiom_loss, train, TrainConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    Config = 5,
    Train = 6,
    Model = 7,
    Checkpoint = 8,
    Panic = 9,
}

/// Parsed ontology.
pub struct TbOntology {
    inner: Ontology,
}

/// Trained or loaded model with its training metadata.
pub struct TbModel {
    inner: Checkpoint,
}

/// Training settings. Obtain defaults with [`tb_train_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TbTrainConfig {
    pub dim: usize,
    pub margin: f64,
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub negatives: usize,
    pub seed: u64,
    pub semantic_enhancement: bool,
    pub threads: usize,
}

impl From<&TrainConfig> for TbTrainConfig {
    fn from(c: &TrainConfig) -> Self {
        TbTrainConfig {
            dim: c.dim,
            margin: c.margin,
            lambda: c.lambda,
            learning_rate: c.learning_rate,
            epochs: c.epochs,
            batch_size: c.batch_size,
            negatives: c.negatives,
            seed: c.seed,
            semantic_enhancement: c.semantic_enhancement,
            threads: c.threads,
        }
    }
}

impl From<&TbTrainConfig> for TrainConfig {
    fn from(c: &TbTrainConfig) -> Self {
        TrainConfig {
            dim: c.dim,
            margin: c.margin,
            lambda: c.lambda,
            learning_rate: c.learning_rate,
            epochs: c.epochs,
            batch_size: c.batch_size,
            negatives: c.negatives,
            seed: c.seed,
            semantic_enhancement: c.semantic_enhancement,
            threads: c.threads,
            ..TrainConfig::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let mut bytes = msg.into().into_bytes();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(TbStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(status: TbStatus, msg: impl ToString) -> FfiResult<T> {
    Err(Failure(status, msg.to_string()))
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> TbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TbStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(TbStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(TbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().map_or_else(|| fail(TbStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().map_or_else(|| fail(TbStatus::NullPointer, format!("{what} is null")), Ok)
}

/// Message for the last failed call on this thread, or NULL after a
/// successful one. The pointer stays valid until the next call into this
/// library from the same thread.
#[no_mangle]
pub extern "C" fn tb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Parses an ontology from NUL-terminated text.
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_ontology_parse(text: *const c_char, out: *mut *mut TbOntology) -> TbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let inner = parse_ontology(text).or_else(|e| fail(TbStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(TbOntology { inner }));
        Ok(())
    })
}

/// Number of axioms in `ontology`, 0 for NULL.
///
/// # Safety
/// `ontology` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tb_ontology_axiom_count(ontology: *const TbOntology) -> usize {
    ontology.as_ref().map_or(0, |o| o.inner.len())
}

/// # Safety
/// `ontology` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tb_ontology_free(ontology: *mut TbOntology) {
    if !ontology.is_null() {
        drop(Box::from_raw(ontology));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_train_config_default(out: *mut TbTrainConfig) -> TbStatus {
    guard(|| {
        *out_arg(out, "out")? = TbTrainConfig::from(&TrainConfig::default());
        Ok(())
    })
}

/// Trains a model on `ontology`.
///
/// # Safety
/// Pointers must be valid; `ontology` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tb_train(
    ontology: *const TbOntology,
    config: *const TbTrainConfig,
    out: *mut *mut TbModel,
) -> TbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let o = ref_arg(ontology, "ontology")?;
        let cfg = TrainConfig::from(ref_arg(config, "config")?);
        cfg.validate().or_else(|e| fail(TbStatus::Config, e))?;
        let outcome = train(&o.inner, &cfg).or_else(|e| fail(TbStatus::Train, e))?;
        let metadata = TrainingMetadata {
            epoch: outcome.trace.len() as u64,
            loss: outcome.trace.last().map_or(f64::NAN, |s| s.total),
            seed: cfg.seed,
            config_digest: cfg.digest(),
        };
        *out = Box::into_raw(Box::new(TbModel { inner: Checkpoint { model: outcome.model, metadata } }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_model_load(path: *const c_char, out: *mut *mut TbModel) -> TbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let inner = load_checkpoint(path).or_else(|e| fail(TbStatus::Checkpoint, format!("{path}: {e}")))?;
        *out = Box::into_raw(Box::new(TbModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn tb_model_save(model: *const TbModel, path: *const c_char) -> TbStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let path = str_arg(path, "path")?;
        save_checkpoint(path, &m.inner).or_else(|e| fail(TbStatus::Io, format!("{path}: {e}")))
    })
}

/// Embedding dimension, 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tb_model_dim(model: *const TbModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.model.dim())
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tb_model_free(model: *mut TbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Checks every axiom of `ontology` against `model` at tolerance `tol`.
/// `violations` may be NULL.
///
/// # Safety
/// Handles must be live and `sound` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_check(
    model: *const TbModel,
    ontology: *const TbOntology,
    tol: f64,
    sound: *mut bool,
    violations: *mut usize,
) -> TbStatus {
    guard(|| {
        let sound = out_arg(sound, "sound")?;
        let m = ref_arg(model, "model")?;
        let o = ref_arg(ontology, "ontology")?;
        if !(tol >= 0.0) {
            return fail(TbStatus::Config, "tol must be >= 0");
        }
        check_signature(o.inner.axioms(), &m.inner.model).or_else(|e| fail(TbStatus::Model, e))?;
        let report = soundness_report(o.inner.axioms(), &m.inner.model, tol);
        *sound = report.sound;
        if let Some(v) = violations.as_mut() {
            *v = report.violations().count();
        }
        Ok(())
    })
}

/// Mean inclusion loss of the axioms of `ontology` with margin `gamma`.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_mean_axiom_loss(
    model: *const TbModel,
    ontology: *const TbOntology,
    gamma: f64,
    out: *mut f64,
) -> TbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = ref_arg(model, "model")?;
        let o = ref_arg(ontology, "ontology")?;
        check_signature(o.inner.axioms(), &m.inner.model).or_else(|e| fail(TbStatus::Model, e))?;
        let (mean, _) = mean_axiom_loss(o.inner.axioms(), &m.inner.model, gamma, Norm::L2)
            .or_else(|e| fail(TbStatus::Model, e))?;
        *out = mean;
        Ok(())
    })
}

/// Plausibility score of `lhs ⊑ rhs`, both given as concept expressions;
/// higher is more plausible and 0 is the maximum.
///
/// # Safety
/// `model` must be a live handle, `lhs` and `rhs` valid C strings and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tb_score(
    model: *const TbModel,
    lhs: *const c_char,
    rhs: *const c_char,
    out: *mut f64,
) -> TbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = ref_arg(model, "model")?;
        let lhs = parse_concept(str_arg(lhs, "lhs")?).or_else(|e| fail(TbStatus::Parse, e))?;
        let rhs = parse_concept(str_arg(rhs, "rhs")?).or_else(|e| fail(TbStatus::Parse, e))?;
        *out = score(&lhs, &rhs, &m.inner.model, &ScoreConfig::default()).or_else(|e| fail(TbStatus::Model, e))?;
        Ok(())
    })
}
