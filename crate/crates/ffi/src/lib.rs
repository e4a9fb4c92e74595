//! C ABI for the `borsuk` library.
//!
//! Conventions:
//! * every fallible function returns a [`BorsukStatus`]; on failure
//!   [`borsuk_last_error`] describes the problem for the calling thread;
//! * results are written through out-pointers, which must be non-null
//!   unless documented as optional;
//! * `p` is passed as a `double`, with `INFINITY` for the max-norm;
//! * handles are created by `borsuk_*_new`-style functions and released
//!   with the matching `borsuk_*_free`; freeing `NULL` is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use borsuk::covering::{axis_cover_spec, verify_covering_tol, DEFAULT_TOL};
use borsuk::hadamard::{build_g, is_hadamard, LinearMap};
use borsuk::partition::{partition, verify_partition, Method, PartitionResult};
use borsuk::sandwich::{bm_lower_bound, bm_upper_certificate};
use borsuk::{Error, PNorm, PointCloud};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BorsukStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SizeGuard = 4,
    Singular = 5,
    Regime = 6,
    Parse = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BorsukMethod {
    Cube = 0,
    HadamardCell = 1,
    Crosspolytope = 2,
}

impl From<Method> for BorsukMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Cube => BorsukMethod::Cube,
            Method::HadamardCell => BorsukMethod::HadamardCell,
            Method::Crosspolytope => BorsukMethod::Crosspolytope,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BorsukDiameter {
    pub value: f64,
    pub index_a: usize,
    pub index_b: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BorsukCertificate {
    /// Largest p-norm of an image of a cube vertex.
    pub r: f64,
    /// Largest q-norm of a row of the inverse.
    pub dual_margin: f64,
    /// `dual_margin <= 1 + 1e-9`.
    pub valid: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BorsukCoverReport {
    pub covered: bool,
    pub worst_margin: f64,
    pub lambda: f64,
    pub samples_used: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BorsukVerifyReport {
    pub valid: bool,
    pub ratio: f64,
    pub original_diameter: f64,
    pub max_part_diameter: f64,
    pub nonempty_parts: usize,
}

/// A point cloud.
pub struct BorsukCloud(PointCloud);

/// A partition of a point cloud.
pub struct BorsukPartition(PartitionResult);

/// An invertible linear map.
pub struct BorsukLinearMap(LinearMap);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs were removed"));
}

struct Failure(BorsukStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch { .. } | Error::ZeroDimension | Error::LabelCount { .. } => {
                BorsukStatus::DimensionMismatch
            }
            Error::SizeGuard { .. } => BorsukStatus::SizeGuard,
            Error::Singular => BorsukStatus::Singular,
            Error::Regime(_) | Error::NoBracket | Error::Unassignable { .. } => BorsukStatus::Regime,
            Error::ExponentSyntax(_) => BorsukStatus::Parse,
            _ => BorsukStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BorsukStatus::NullPointer, format!("`{what}` is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BorsukStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BorsukStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error: panic inside the library");
            BorsukStatus::Internal
        }
    }
}

fn norm(p: f64) -> Result<PNorm, Failure> {
    Ok(PNorm::new(p)?)
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn borsuk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn borsuk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `||x||_p` for `x` of length `len`.
///
/// # Safety
/// `x` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_pnorm(x: *const f64, len: usize, p: f64, out_value: *mut f64) -> BorsukStatus {
    guard(|| {
        let nm = norm(p)?;
        let x = input(x, len, "x")?;
        *out(out_value, "out_value")? = nm.norm(x);
        Ok(())
    })
}

/// Copies `n_points * dim` row-major coordinates into a new cloud.
///
/// # Safety
/// `coords` must point to `n_points * dim` doubles; `out_cloud` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_cloud_new(
    dim: usize,
    coords: *const f64,
    n_points: usize,
    out_cloud: *mut *mut BorsukCloud,
) -> BorsukStatus {
    guard(|| {
        let out_cloud = out(out_cloud, "out_cloud")?;
        let len = n_points
            .checked_mul(dim)
            .ok_or_else(|| Failure(BorsukStatus::InvalidArgument, "n_points * dim overflows".into()))?;
        let coords = input(coords, len, "coords")?;
        let cloud = PointCloud::from_flat(dim, coords.to_vec())?;
        *out_cloud = Box::into_raw(Box::new(BorsukCloud(cloud)));
        Ok(())
    })
}

/// Parses `{"dim": int, "points": [[...], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_cloud` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_cloud_from_json(json: *const c_char, out_cloud: *mut *mut BorsukCloud) -> BorsukStatus {
    guard(|| {
        let out_cloud = out(out_cloud, "out_cloud")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure(BorsukStatus::Parse, "input is not UTF-8".into()))?;
        let cloud = PointCloud::from_json(text).map_err(|m| Failure(BorsukStatus::Parse, m))?;
        *out_cloud = Box::into_raw(Box::new(BorsukCloud(cloud)));
        Ok(())
    })
}

/// Number of points; 0 for `NULL`.
///
/// # Safety
/// `cloud` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn borsuk_cloud_len(cloud: *const BorsukCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.len())
}

/// Dimension; 0 for `NULL`.
///
/// # Safety
/// `cloud` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn borsuk_cloud_dim(cloud: *const BorsukCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.dim())
}

/// # Safety
/// `cloud` must be `NULL` or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn borsuk_cloud_free(cloud: *mut BorsukCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Exact pairwise p-diameter with the attaining index pair.
///
/// # Safety
/// `cloud` must be a live handle; `out_diameter` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_diameter(
    cloud: *const BorsukCloud,
    p: f64,
    out_diameter: *mut BorsukDiameter,
) -> BorsukStatus {
    guard(|| {
        let nm = norm(p)?;
        let cloud = handle(cloud, "cloud")?;
        let w = borsuk::lpcore::diameter(&cloud.0, &nm);
        *out(out_diameter, "out_diameter")? = BorsukDiameter {
            value: w.value,
            index_a: w.index_a,
            index_b: w.index_b,
        };
        Ok(())
    })
}

/// Partitions a 4-dimensional cloud into at most 16 parts of smaller diameter.
///
/// # Safety
/// `cloud` must be a live handle; `out_partition` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition(
    cloud: *const BorsukCloud,
    p: f64,
    out_partition: *mut *mut BorsukPartition,
) -> BorsukStatus {
    guard(|| {
        let nm = norm(p)?;
        let cloud = handle(cloud, "cloud")?;
        let out_partition = out(out_partition, "out_partition")?;
        let result = partition(&cloud.0, &nm)?;
        *out_partition = Box::into_raw(Box::new(BorsukPartition(result)));
        Ok(())
    })
}

/// Copies the labels into `labels`, which must hold one entry per point.
///
/// # Safety
/// `part` must be a live handle; `labels` must point to `capacity` writable entries.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition_labels(
    part: *const BorsukPartition,
    labels: *mut usize,
    capacity: usize,
) -> BorsukStatus {
    guard(|| {
        let part = handle(part, "part")?;
        let need = part.0.labels.len();
        if capacity < need {
            return Err(Failure(
                BorsukStatus::BufferTooSmall,
                format!("labels needs {need} entries, capacity is {capacity}"),
            ));
        }
        output(labels, need, "labels")?.copy_from_slice(&part.0.labels);
        Ok(())
    })
}

/// Largest part diameter over the cloud diameter; NaN for `NULL`.
///
/// # Safety
/// `part` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition_ratio(part: *const BorsukPartition) -> f64 {
    part.as_ref().map_or(f64::NAN, |p| p.0.ratio)
}

/// Number of nonempty parts; 0 for `NULL`.
///
/// # Safety
/// `part` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition_nonempty_parts(part: *const BorsukPartition) -> usize {
    part.as_ref().map_or(0, |p| p.0.nonempty_parts)
}

/// Number of labels (points); 0 for `NULL`.
///
/// # Safety
/// `part` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition_len(part: *const BorsukPartition) -> usize {
    part.as_ref().map_or(0, |p| p.0.labels.len())
}

/// # Safety
/// `part` must be a live handle; `out_method` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition_method(
    part: *const BorsukPartition,
    out_method: *mut BorsukMethod,
) -> BorsukStatus {
    guard(|| {
        let part = handle(part, "part")?;
        *out(out_method, "out_method")? = part.0.method.into();
        Ok(())
    })
}

/// Writes the full result as NUL-terminated JSON. `out_len` (optional)
/// receives the length without the terminator, also when the buffer is too small.
///
/// # Safety
/// `part` must be a live handle; `buffer` must point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition_to_json(
    part: *const BorsukPartition,
    buffer: *mut c_char,
    capacity: usize,
    out_len: *mut usize,
) -> BorsukStatus {
    guard(|| {
        let part = handle(part, "part")?;
        let text = borsuk::cli::to_json(&part.0);
        if let Some(len) = out_len.as_mut() {
            *len = text.len();
        }
        if capacity < text.len() + 1 {
            return Err(Failure(
                BorsukStatus::BufferTooSmall,
                format!("JSON needs {} bytes, capacity is {capacity}", text.len() + 1),
            ));
        }
        let buf = output(buffer.cast::<u8>(), capacity, "buffer")?;
        buf[..text.len()].copy_from_slice(text.as_bytes());
        buf[text.len()] = 0;
        Ok(())
    })
}

/// Recomputes every part diameter of `part` over `cloud`.
///
/// # Safety
/// `cloud` and `part` must be live handles; `out_report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition_verify(
    cloud: *const BorsukCloud,
    part: *const BorsukPartition,
    p: f64,
    out_report: *mut BorsukVerifyReport,
) -> BorsukStatus {
    guard(|| {
        let nm = norm(p)?;
        let cloud = handle(cloud, "cloud")?;
        let part = handle(part, "part")?;
        let r = verify_partition(&cloud.0, &nm, &part.0)?;
        *out(out_report, "out_report")? = BorsukVerifyReport {
            valid: r.valid && r.matches_reported,
            ratio: r.ratio,
            original_diameter: r.original_diameter,
            max_part_diameter: r.max_part_diameter,
            nonempty_parts: r.nonempty_parts,
        };
        Ok(())
    })
}

/// # Safety
/// `part` must be `NULL` or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn borsuk_partition_free(part: *mut BorsukPartition) {
    if !part.is_null() {
        drop(Box::from_raw(part));
    }
}

/// The Hadamard construction for `C_n` against `C_(n,p)`, `1 <= p <= 2`, `n <= 20`.
///
/// # Safety
/// `out_map` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_build_g(n: usize, p: f64, out_map: *mut *mut BorsukLinearMap) -> BorsukStatus {
    guard(|| {
        let nm = norm(p)?;
        let out_map = out(out_map, "out_map")?;
        *out_map = Box::into_raw(Box::new(BorsukLinearMap(build_g(n, &nm)?)));
        Ok(())
    })
}

/// A general invertible map from `dim * dim` row-major entries.
///
/// # Safety
/// `entries` must point to `dim * dim` doubles; `out_map` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_linear_map_new(
    dim: usize,
    entries: *const f64,
    out_map: *mut *mut BorsukLinearMap,
) -> BorsukStatus {
    guard(|| {
        let out_map = out(out_map, "out_map")?;
        let len = dim
            .checked_mul(dim)
            .ok_or_else(|| Failure(BorsukStatus::InvalidArgument, "dim * dim overflows".into()))?;
        let entries = input(entries, len, "entries")?;
        let map = LinearMap::from_row_major(dim, entries.to_vec())?;
        *out_map = Box::into_raw(Box::new(BorsukLinearMap(map)));
        Ok(())
    })
}

/// Dimension; 0 for `NULL`.
///
/// # Safety
/// `map` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn borsuk_linear_map_dim(map: *const BorsukLinearMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.dim())
}

/// # Safety
/// `map` must be `NULL` or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn borsuk_linear_map_free(map: *mut BorsukLinearMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Sandwich certificate by exhaustive vertex enumeration. When
/// `argmax_vertex` is non-null it receives the attaining sign vector and
/// must hold `dim` entries.
///
/// # Safety
/// `map` must be a live handle; `out_certificate` must be writable;
/// `argmax_vertex` must be `NULL` or point to `dim` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn borsuk_bm_certificate(
    map: *const BorsukLinearMap,
    p: f64,
    out_certificate: *mut BorsukCertificate,
    argmax_vertex: *mut i8,
) -> BorsukStatus {
    guard(|| {
        let nm = norm(p)?;
        let map = handle(map, "map")?;
        let out_certificate = out(out_certificate, "out_certificate")?;
        let cert = bm_upper_certificate(&map.0, &nm)?;
        if !argmax_vertex.is_null() {
            output(argmax_vertex, cert.argmax_vertex.len(), "argmax_vertex")?.copy_from_slice(&cert.argmax_vertex);
        }
        *out_certificate = BorsukCertificate {
            r: cert.r,
            dual_margin: cert.dual_margin,
            valid: cert.is_valid(),
        };
        Ok(())
    })
}

/// `2^(1/2 - 1/p) sqrt(n)` for `1 <= p < 2`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_bm_lower_bound(n: usize, p: f64, out_value: *mut f64) -> BorsukStatus {
    guard(|| {
        let nm = norm(p)?;
        *out(out_value, "out_value")? = bm_lower_bound(n, &nm)?;
        Ok(())
    })
}

/// Verifies the covering of `C_(n,p)` by the 2n translates `lambda C_(n,p) ± n^(-1/p) e_i`.
/// `lambda <= 0` selects `((n-1)/n)^(1/p)`. `witness` (optional) receives `n` coordinates
/// of the worst tested point.
///
/// # Safety
/// `out_report` must be writable; `witness` must be `NULL` or point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn borsuk_verify_cover(
    n: usize,
    p: f64,
    lambda: f64,
    samples: usize,
    seed: u64,
    out_report: *mut BorsukCoverReport,
    witness: *mut f64,
) -> BorsukStatus {
    guard(|| {
        let nm = norm(p)?;
        let out_report = out(out_report, "out_report")?;
        let mut spec = axis_cover_spec(n, &nm)?;
        if lambda.is_nan() {
            return Err(Failure(BorsukStatus::InvalidArgument, "lambda is NaN".into()));
        }
        if lambda > 0.0 {
            spec = spec.with_lambda(lambda);
        }
        let report = verify_covering_tol(&spec, samples, seed, DEFAULT_TOL);
        if !witness.is_null() {
            output(witness, n, "witness")?.copy_from_slice(&report.witness);
        }
        *out_report = BorsukCoverReport {
            covered: report.covered,
            worst_margin: report.worst_margin,
            lambda: spec.lambda,
            samples_used: report.samples_used,
        };
        Ok(())
    })
}

/// Exact check of `H H^T = order I` for `order * order` row-major entries.
///
/// # Safety
/// `entries` must point to `order * order` integers; `out_result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn borsuk_is_hadamard(order: usize, entries: *const i64, out_result: *mut bool) -> BorsukStatus {
    guard(|| {
        let out_result = out(out_result, "out_result")?;
        let len = order
            .checked_mul(order)
            .ok_or_else(|| Failure(BorsukStatus::InvalidArgument, "order * order overflows".into()))?;
        let entries = input(entries, len, "entries")?;
        let rows: Vec<Vec<i64>> = entries.chunks(order.max(1)).map(<[i64]>::to_vec).collect();
        *out_result = is_hadamard(&rows)?;
        Ok(())
    })
}

#[doc(hidden)]
pub fn last_error_string() -> String {
    LAST_ERROR.with(|e| e.borrow().to_string_lossy().into_owned())
}
