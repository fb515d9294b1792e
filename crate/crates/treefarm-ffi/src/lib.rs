//! C ABI for the treefarm decision-tree library.
//!
//! Datasets and trained trees are opaque handles created and destroyed
//! here; every fallible call returns a status code and leaves a detail
//! message retrievable with `tf_last_error_message` (thread-local, valid
//! until the next failing call on the same thread). Strings handed out by
//! this library must be released with `tf_string_free`, handles with their
//! `_free` function. All pointers must be non-null unless stated otherwise;
//! panics never unwind across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use treefarm::dataset::{load_data, load_schema};
use treefarm::{
    build_parallel, BuildParams, CostModel, Error, FarmConfig, GrowthParams, SchedulerKind,
    Strategy, TrainingSet,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TfStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArg = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// A file could not be read.
    Io = 3,
    /// Schema or data text failed to parse.
    Parse = 4,
    /// Invalid build configuration.
    Config = 5,
    /// Tree growth failed.
    Build = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

/// Tree-growth strategy.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TfStrategy {
    Seq = 0,
    Np = 1,
    Nap = 2,
}

/// Task-to-worker scheduling policy.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TfScheduler {
    Drr = 0,
    OnDemand = 1,
    Weighted = 2,
}

/// Node- vs attribute-granularity decision rule.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TfCostModel {
    Alpha = 0,
    NLogN = 1,
    NSquared = 2,
}

/// All knobs of one training run. Obtain defaults from
/// `tf_build_options_default` and override fields as needed.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct TfBuildOptions {
    pub strategy: TfStrategy,
    pub workers: usize,
    pub scheduler: TfScheduler,
    pub qsize: usize,
    pub cost_model: TfCostModel,
    pub alpha: u64,
    pub min_cases: f64,
    pub counting_sort: bool,
}

/// Opaque loaded training set.
pub struct TfDataset {
    inner: TrainingSet,
}

/// Opaque trained tree: rendered text plus size statistics.
pub struct TfTree {
    text: CString,
    nodes: usize,
    leaves: usize,
    depth: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: TfStatus, message: String) -> TfStatus {
    set_last_error(message);
    status
}

fn fail_with(e: &Error) -> TfStatus {
    let status = match e {
        Error::Io { .. } => TfStatus::Io,
        Error::Schema { .. } | Error::Data { .. } | Error::EmptyTrainingSet => TfStatus::Parse,
        Error::InvalidConfig(_) => TfStatus::Config,
        _ => TfStatus::Build,
    };
    fail(status, e.to_string())
}

/// Message describing the most recent failure on this thread, or null.
/// The pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn tf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map_or(ptr::null(), |message| message.as_ptr())
    })
}

fn guard(body: impl FnOnce() -> TfStatus) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(TfStatus::Panic, "panic inside treefarm".into()),
    }
}

/// # Safety
/// `ptr` must be non-null and point to a NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, TfStatus> {
    if ptr.is_null() {
        return Err(fail(TfStatus::NullArg, "null string argument".into()));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(TfStatus::Utf8, "string argument is not valid UTF-8".into()))
}

fn dataset_from_text(schema_text: &str, csv_text: &str) -> Result<TrainingSet, Error> {
    let schema = load_schema(schema_text)?;
    load_data(&schema, csv_text)
}

/// Parses schema and CSV text into a dataset handle.
///
/// # Safety
/// `schema_text` and `csv_text` must be NUL-terminated strings; `out` must
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tf_dataset_from_text(
    schema_text: *const c_char,
    csv_text: *const c_char,
    out: *mut *mut TfDataset,
) -> TfStatus {
    guard(|| {
        if out.is_null() {
            return fail(TfStatus::NullArg, "null output argument".into());
        }
        let schema = match unsafe { utf8_arg(schema_text) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let csv = match unsafe { utf8_arg(csv_text) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        match dataset_from_text(schema, csv) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(TfDataset { inner })) };
                TfStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Reads schema and CSV files into a dataset handle.
///
/// # Safety
/// `schema_path` and `data_path` must be NUL-terminated strings; `out` must
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tf_dataset_load(
    schema_path: *const c_char,
    data_path: *const c_char,
    out: *mut *mut TfDataset,
) -> TfStatus {
    guard(|| {
        if out.is_null() {
            return fail(TfStatus::NullArg, "null output argument".into());
        }
        let schema_path = match unsafe { utf8_arg(schema_path) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let data_path = match unsafe { utf8_arg(data_path) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let read = |p: &str| {
            std::fs::read_to_string(p)
                .map_err(|source| Error::Io { path: Path::new(p).to_path_buf(), source })
        };
        let loaded = read(schema_path)
            .and_then(|s| read(data_path).map(|d| (s, d)))
            .and_then(|(s, d)| dataset_from_text(&s, &d));
        match loaded {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(TfDataset { inner })) };
                TfStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Number of cases, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tf_dataset_case_count(dataset: *const TfDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.inner.case_count())
}

/// Number of attributes, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tf_dataset_attribute_count(dataset: *const TfDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.inner.attribute_count())
}

/// Number of class labels, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tf_dataset_class_count(dataset: *const TfDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.inner.class_count())
}

/// Releases a dataset handle. Null is allowed.
///
/// # Safety
/// `dataset` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tf_dataset_free(dataset: *mut TfDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Defaults: sequential strategy, 3 workers, weighted scheduling, queue
/// capacity 4096, |T| < c·r² cost model with alpha 1000, min-cases 2.
#[no_mangle]
pub extern "C" fn tf_build_options_default() -> TfBuildOptions {
    TfBuildOptions {
        strategy: TfStrategy::Seq,
        workers: 3,
        scheduler: TfScheduler::Weighted,
        qsize: 4096,
        cost_model: TfCostModel::NSquared,
        alpha: 1000,
        min_cases: 2.0,
        counting_sort: false,
    }
}

fn build_params(options: &TfBuildOptions) -> BuildParams {
    BuildParams {
        strategy: match options.strategy {
            TfStrategy::Seq => Strategy::Seq,
            TfStrategy::Np => Strategy::Np,
            TfStrategy::Nap => Strategy::Nap,
        },
        farm: FarmConfig {
            workers: options.workers,
            qsize: options.qsize,
            scheduler: match options.scheduler {
                TfScheduler::Drr => SchedulerKind::Drr,
                TfScheduler::OnDemand => SchedulerKind::OnDemand,
                TfScheduler::Weighted => SchedulerKind::Weighted,
            },
        },
        cost_model: match options.cost_model {
            TfCostModel::Alpha => CostModel::Alpha { alpha: options.alpha },
            TfCostModel::NLogN => CostModel::NLogN,
            TfCostModel::NSquared => CostModel::NSquared,
        },
        growth: GrowthParams {
            min_cases: options.min_cases,
            counting_sort: options.counting_sort,
        },
    }
}

/// Trains a tree on the dataset. `options` may be null for defaults.
///
/// # Safety
/// `dataset` must be a live handle; `options` must be null or valid; `out`
/// must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tf_train(
    dataset: *const TfDataset,
    options: *const TfBuildOptions,
    out: *mut *mut TfTree,
) -> TfStatus {
    guard(|| {
        if out.is_null() {
            return fail(TfStatus::NullArg, "null output argument".into());
        }
        let Some(dataset) = (unsafe { dataset.as_ref() }) else {
            return fail(TfStatus::NullArg, "null dataset handle".into());
        };
        let options =
            unsafe { options.as_ref() }.copied().unwrap_or_else(|| tf_build_options_default());
        let params = build_params(&options);
        match build_parallel(&dataset.inner, &params) {
            Ok(tree) => {
                let text = tree.render(&dataset.inner).replace('\0', "?");
                let tree = TfTree {
                    text: CString::new(text).unwrap(),
                    nodes: tree.node_count(),
                    leaves: tree.leaf_count(),
                    depth: tree.depth(),
                };
                unsafe { *out = Box::into_raw(Box::new(tree)) };
                TfStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Total node count, or 0 for a null handle.
///
/// # Safety
/// `tree` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tf_tree_node_count(tree: *const TfTree) -> usize {
    unsafe { tree.as_ref() }.map_or(0, |t| t.nodes)
}

/// Leaf count, or 0 for a null handle.
///
/// # Safety
/// `tree` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tf_tree_leaf_count(tree: *const TfTree) -> usize {
    unsafe { tree.as_ref() }.map_or(0, |t| t.leaves)
}

/// Number of levels (a lone leaf has depth 1), or 0 for a null handle.
///
/// # Safety
/// `tree` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tf_tree_depth(tree: *const TfTree) -> usize {
    unsafe { tree.as_ref() }.map_or(0, |t| t.depth)
}

/// Copies the tree text (one node per line) into a fresh string owned by
/// the caller; release it with `tf_string_free`.
///
/// # Safety
/// `tree` must be a live handle; `out` must point to writable storage for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn tf_tree_render(tree: *const TfTree, out: *mut *mut c_char) -> TfStatus {
    guard(|| {
        if out.is_null() {
            return fail(TfStatus::NullArg, "null output argument".into());
        }
        let Some(tree) = (unsafe { tree.as_ref() }) else {
            return fail(TfStatus::NullArg, "null tree handle".into());
        };
        unsafe { *out = tree.text.clone().into_raw() };
        TfStatus::Ok
    })
}

/// Releases a tree handle. Null is allowed.
///
/// # Safety
/// `tree` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tf_tree_free(tree: *mut TfTree) {
    if !tree.is_null() {
        drop(unsafe { Box::from_raw(tree) });
    }
}

/// Releases a string returned by this library. Null is allowed.
///
/// # Safety
/// `s` must have been returned by this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
