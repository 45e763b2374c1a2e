//! C ABI over `leafwood`.
//!
//! Handles are opaque pointers created by `lw_*_new`/`lw_*_read`/`lw_*_load`
//! style calls and released by the matching `*_free`. Every fallible call
//! returns an [`LwStatus`]; on failure, [`lw_last_error_message`] describes
//! the error for the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;


use leafwood::eval::{confusion, Metrics};
use leafwood::features::{compute_features, FeatureVector};
use leafwood::sampling::{auto_select, SampleProfile};
use leafwood::spatial::SpatialIndex;
use leafwood::svm::{self, SvmHyperparams, SvmModel};
use leafwood::{Class, Error, ErrorClass, LabelVector, Point3, PointCloud};

/// Status codes. The nonzero library codes match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LwStatus {
    Ok = 0,
    Config = 2,
    Io = 3,
    Numeric = 4,
    NullPointer = 10,
    InvalidArgument = 11,
    Panic = 12,
}

/// A point cloud plus its cached feature vectors.
pub struct LwCloud {
    cloud: PointCloud,
    index: Option<SpatialIndex>,
    features: Option<(usize, Vec<FeatureVector>)>,
}

/// A trained classifier.
pub struct LwModel {
    model: SvmModel,
}

/// Options for [`lw_auto_train`]. Fill with [`lw_train_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LwTrainOptions {
    pub k: usize,
    pub seed: u64,
    pub n_candidates: usize,
    pub n_leaf: usize,
    pub n_wood: usize,
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Nonzero to standardize features before training.
    pub scaling: u8,
}

/// Agreement statistics. Leaf is the positive class.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LwMetrics {
    pub p_o: f64,
    pub kappa_paper: f64,
    pub kappa_standard: f64,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: LwStatus, msg: &str) -> LwStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> LwStatus {
    let status = match e.class() {
        ErrorClass::Config => LwStatus::Config,
        ErrorClass::Io => LwStatus::Io,
        ErrorClass::Numeric => LwStatus::Numeric,
    };
    fail(status, &e.to_string())
}

/// Runs `f`, converting errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), LwStatus>) -> LwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(LwStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: leafwood::Result<T>) -> Result<T, LwStatus> {
    r.map_err(|e| from_error(&e))
}

fn null() -> LwStatus {
    fail(LwStatus::NullPointer, "null pointer argument")
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, LwStatus> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(LwStatus::InvalidArgument, "path is not valid UTF-8"))
}

impl LwCloud {
    fn new(cloud: PointCloud) -> Self {
        LwCloud {
            cloud,
            index: None,
            features: None,
        }
    }

    fn ensure_features(&mut self, k: usize) -> leafwood::Result<()> {
        if self.index.is_none() {
            self.index = Some(SpatialIndex::build(&self.cloud)?);
        }
        if self.features.as_ref().map(|f| f.0) != Some(k) {
            let index = self.index.as_ref().expect("index built above");
            self.features = Some((k, compute_features(&self.cloud, index, k)?));
        }
        Ok(())
    }
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a cloud from `n` interleaved x, y, z triples.
///
/// # Safety
/// `xyz` must point to `3 * n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_cloud_from_xyz(xyz: *const f64, n: usize, out: *mut *mut LwCloud) -> LwStatus {
    guard(|| {
        if xyz.is_null() || out.is_null() {
            return Err(null());
        }
        let len = n
            .checked_mul(3)
            .ok_or_else(|| fail(LwStatus::InvalidArgument, "point count overflows"))?;
        let raw = std::slice::from_raw_parts(xyz, len);
        let points = raw.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect();
        let cloud = lib(PointCloud::new(points))?;
        *out = Box::into_raw(Box::new(LwCloud::new(cloud)));
        Ok(())
    })
}

/// Reads a `.xyz` or ASCII `.ply` cloud.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_cloud_read(path: *const c_char, out: *mut *mut LwCloud) -> LwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let path = path_arg(path)?;
        let (cloud, _) = lib(leafwood::io::read_cloud(&path))?;
        *out = Box::into_raw(Box::new(LwCloud::new(cloud)));
        Ok(())
    })
}

/// Number of points in the cloud, 0 for a null handle.
///
/// # Safety
/// `cloud` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lw_cloud_len(cloud: *const LwCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.cloud.len())
}

/// # Safety
/// `cloud` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lw_cloud_free(cloud: *mut LwCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Computes (and caches) the feature vectors for neighborhood size `k`,
/// then copies them into `out` as `n * 5` doubles laid out x, y, z,
/// c_lambda, rho per point. `out` may be null to only fill the cache.
///
/// # Safety
/// `cloud` must be a live handle; `out`, when non-null, must hold `out_len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn lw_compute_features(
    cloud: *mut LwCloud,
    k: usize,
    out: *mut f64,
    out_len: usize,
) -> LwStatus {
    guard(|| {
        let c = cloud.as_mut().ok_or_else(null)?;
        lib(c.ensure_features(k))?;
        if out.is_null() {
            return Ok(());
        }
        let feats = &c.features.as_ref().expect("features computed").1;
        let need = feats.len() * FeatureVector::DIM;
        if out_len < need {
            return Err(fail(
                LwStatus::InvalidArgument,
                &format!("output buffer holds {out_len} doubles, {need} needed"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, need);
        for (chunk, f) in dst.chunks_exact_mut(FeatureVector::DIM).zip(feats) {
            chunk.copy_from_slice(&f.to_array());
        }
        Ok(())
    })
}

/// Writes the default training options into `out`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_train_options_default(out: *mut LwTrainOptions) -> LwStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(null)?;
        let p = SampleProfile::BALANCED;
        let hp = SvmHyperparams::default();
        *out = LwTrainOptions {
            k: leafwood::features::DEFAULT_K,
            seed: 42,
            n_candidates: p.n_candidates,
            n_leaf: p.n_leaf,
            n_wood: p.n_wood,
            c: hp.c,
            gamma: hp.gamma,
            tol: hp.tol,
            max_iter: hp.max_iter,
            scaling: hp.scaling as u8,
        };
        Ok(())
    })
}

/// Selects a training set automatically and trains a model on it.
///
/// # Safety
/// `cloud` must be a live handle, `opts` readable (or null for defaults)
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lw_auto_train(
    cloud: *mut LwCloud,
    opts: *const LwTrainOptions,
    out: *mut *mut LwModel,
) -> LwStatus {
    guard(|| {
        let c = cloud.as_mut().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let o = match opts.as_ref() {
            Some(o) => *o,
            None => {
                let mut d = std::mem::zeroed();
                lw_train_options_default(&mut d);
                d
            }
        };
        let profile = SampleProfile {
            n_candidates: o.n_candidates,
            n_leaf: o.n_leaf,
            n_wood: o.n_wood,
        };
        let hp = SvmHyperparams {
            c: o.c,
            gamma: o.gamma,
            tol: o.tol,
            max_iter: o.max_iter,
            scaling: o.scaling != 0,
        };
        lib(c.ensure_features(o.k))?;
        let feats = &c.features.as_ref().expect("features computed").1;
        let index = c.index.as_ref().expect("index built");
        let sel = lib(auto_select(&c.cloud, index, &profile, o.k, o.seed, Some(feats)))?;
        let (model, _) = lib(svm::train_entries(sel.training.entries(), &hp, o.seed))?;
        *out = Box::into_raw(Box::new(LwModel { model }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lw_model_load(path: *const c_char, out: *mut *mut LwModel) -> LwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let path = path_arg(path)?;
        let model = lib(SvmModel::load(&path))?;
        *out = Box::into_raw(Box::new(LwModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lw_model_save(model: *const LwModel, path: *const c_char) -> LwStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(null)?;
        let path = path_arg(path)?;
        lib(m.model.save(&path))
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lw_model_free(model: *mut LwModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Classifies every point (features at neighborhood size `k`) and writes
/// one label per point into `labels`: 1 leaf, 0 wood.
///
/// # Safety
/// Handles must be live; `labels` must hold `n` bytes where `n` is the
/// cloud size.
#[no_mangle]
pub unsafe extern "C" fn lw_classify(
    model: *const LwModel,
    cloud: *mut LwCloud,
    k: usize,
    labels: *mut u8,
    n: usize,
) -> LwStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(null)?;
        let c = cloud.as_mut().ok_or_else(null)?;
        if labels.is_null() {
            return Err(null());
        }
        if n != c.cloud.len() {
            return Err(fail(
                LwStatus::InvalidArgument,
                &format!("label buffer holds {n} entries, cloud has {}", c.cloud.len()),
            ));
        }
        lib(c.ensure_features(k))?;
        let feats = &c.features.as_ref().expect("features computed").1;
        let pred = svm::classify_cloud(&m.model, feats);
        let dst = std::slice::from_raw_parts_mut(labels, n);
        for (d, class) in dst.iter_mut().zip(pred.iter()) {
            *d = class.code();
        }
        Ok(())
    })
}

/// Decision value of the model at one feature vector (5 doubles). Values
/// at or above zero mean leaf.
///
/// # Safety
/// `features` must hold 5 doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_decision_value(
    model: *const LwModel,
    features: *const f64,
    out: *mut f64,
) -> LwStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(null)?;
        if features.is_null() || out.is_null() {
            return Err(null());
        }
        let f = std::slice::from_raw_parts(features, FeatureVector::DIM);
        let fv = FeatureVector {
            x: f[0],
            y: f[1],
            z: f[2],
            c_lambda: f[3],
            rho: f[4],
        };
        *out = m.model.decision_value(&fv);
        Ok(())
    })
}

fn labels_arg(p: *const u8, n: usize, what: &str) -> Result<LabelVector, LwStatus> {
    // SAFETY: checked for null; the caller guarantees `n` readable bytes.
    let raw = unsafe { std::slice::from_raw_parts(p, n) };
    raw.iter()
        .map(|&b| Class::from_code(b as i64))
        .collect::<Option<Vec<_>>>()
        .map(LabelVector)
        .ok_or_else(|| fail(LwStatus::InvalidArgument, &format!("{what} labels must be 0 or 1")))
}

/// Compares `n` predicted labels against `n` truth labels (0 wood, 1 leaf).
///
/// # Safety
/// `pred` and `truth` must hold `n` bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_evaluate(
    pred: *const u8,
    truth: *const u8,
    n: usize,
    out: *mut LwMetrics,
) -> LwStatus {
    guard(|| {
        if pred.is_null() || truth.is_null() || out.is_null() {
            return Err(null());
        }
        if n == 0 {
            return Err(fail(LwStatus::InvalidArgument, "no labels to compare"));
        }
        let p = labels_arg(pred, n, "predicted")?;
        let t = labels_arg(truth, n, "truth")?;
        let cm = lib(confusion(&p, &t))?;
        let m = Metrics::from_confusion(&cm);
        *out = LwMetrics {
            p_o: m.p_o,
            kappa_paper: m.kappa_paper,
            kappa_standard: m.kappa_standard,
            tp: cm.tp,
            tn: cm.tn,
            fp: cm.fp,
            fn_: cm.fn_,
        };
        Ok(())
    })
}

