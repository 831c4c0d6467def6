//! C ABI for `phfeat`.
//!
//! Images and barcodes cross the boundary as opaque handles owned by the
//! caller and released with the matching `*_free` function. Every fallible
//! call returns a [`PhStatus`]; on failure, [`ph_last_error_message`]
//! describes the most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use phfeat::barcode::{aggregate, Bar, Barcode, Range};
use phfeat::imaging::{load_image, GrayImage};
use phfeat::persistence::{cubical_persistence, rips_persistence, Diagram, MaxScale};
use phfeat::ulbp::{select_landmarks, Pattern};
use phfeat::vectorize::{Method, VectorizerConfig};
use phfeat::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DimensionMismatch = 4,
    BufferTooSmall = 5,
    IoError = 6,
    Panic = 7,
}

/// Vectorization method.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhMethod {
    /// Betti curve.
    Bc = 0,
    /// Persistent statistics.
    Ps = 1,
    /// Entropy summary.
    Es = 2,
    /// Persistence landscape.
    Pl = 3,
    /// Tropical coordinates.
    Tc = 4,
}

impl From<PhMethod> for Method {
    fn from(m: PhMethod) -> Self {
        match m {
            PhMethod::Bc => Method::Bc,
            PhMethod::Ps => Method::Ps,
            PhMethod::Es => Method::Es,
            PhMethod::Pl => Method::Pl,
            PhMethod::Tc => Method::Tc,
        }
    }
}

/// One interval, copied out of a barcode.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhBar {
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
}

/// Opaque grayscale image.
pub struct PhImage(GrayImage);

/// Opaque barcode of a single homology dimension.
pub struct PhBarcode(Barcode);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: PhStatus, msg: impl Into<String>) -> PhStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> PhStatus {
    match e {
        Error::DimensionMismatch { .. } => PhStatus::DimensionMismatch,
        Error::ParseAtOffset { .. } | Error::ParseAtRow { .. } | Error::Json(_) | Error::Csv(_) => PhStatus::ParseError,
        Error::File { .. } | Error::Io(_) => PhStatus::IoError,
        _ => PhStatus::InvalidArgument,
    }
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PhStatus>) -> PhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PhStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PhStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lib<T>(r: phfeat::Result<T>) -> Result<T, PhStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), PhStatus> {
    if p.is_null() {
        Err(fail(PhStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread, or NULL if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ph_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ph_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates an image from `width * height` row-major intensities.
///
/// # Safety
/// `pixels` must point to `width * height` readable doubles and `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_image_new(
    width: usize,
    height: usize,
    pixels: *const f64,
    out: *mut *mut PhImage,
) -> PhStatus {
    guard(|| {
        non_null(pixels, "pixels")?;
        non_null(out, "out")?;
        let n = width
            .checked_mul(height)
            .ok_or_else(|| fail(PhStatus::InvalidArgument, "image size overflows"))?;
        let data = std::slice::from_raw_parts(pixels, n).to_vec();
        let img = lib(GrayImage::new(width, height, data))?;
        put(out, PhImage(img));
        Ok(())
    })
}

/// Loads a PGM (P2/P5) or CSV-matrix image.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_image_load(path: *const c_char, out: *mut *mut PhImage) -> PhStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(PhStatus::InvalidArgument, "path is not UTF-8"))?;
        let img = lib(load_image(Path::new(path)))?;
        put(out, PhImage(img));
        Ok(())
    })
}

/// # Safety
/// `image` must be NULL or a handle from `ph_image_new`/`ph_image_load` not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn ph_image_free(image: *mut PhImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Width in pixels, or 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ph_image_width(image: *const PhImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.width())
}

/// Height in pixels, or 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ph_image_height(image: *const PhImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.height())
}

unsafe fn put_diagram(d: Diagram, dim0: *mut *mut PhBarcode, dim1: *mut *mut PhBarcode) {
    put(dim0, PhBarcode(d.dim0));
    put(dim1, PhBarcode(d.dim1));
}

/// Sublevel-set persistence of the image; writes one new barcode per
/// dimension.
///
/// # Safety
/// `image` must be a live handle; `dim0` and `dim1` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_cubical_persistence(
    image: *const PhImage,
    dim0: *mut *mut PhBarcode,
    dim1: *mut *mut PhBarcode,
) -> PhStatus {
    guard(|| {
        non_null(image, "image")?;
        non_null(dim0, "dim0")?;
        non_null(dim1, "dim1")?;
        put_diagram(cubical_persistence(&(*image).0), dim0, dim1);
        Ok(())
    })
}

/// Vietoris–Rips persistence of the pixels matching the uniform pattern
/// `G{geometry}R{rotation}`. A negative or NaN `max_scale` means the largest
/// pairwise distance; infinite values are rejected.
///
/// # Safety
/// `image` must be a live handle; `dim0` and `dim1` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_landmark_rips_persistence(
    image: *const PhImage,
    geometry: u8,
    rotation: u8,
    max_scale: f64,
    dim0: *mut *mut PhBarcode,
    dim1: *mut *mut PhBarcode,
) -> PhStatus {
    guard(|| {
        non_null(image, "image")?;
        non_null(dim0, "dim0")?;
        non_null(dim1, "dim1")?;
        let pattern = lib(Pattern::new(geometry, rotation))?;
        if max_scale.is_infinite() {
            return Err(fail(PhStatus::InvalidArgument, "max_scale must be finite"));
        }
        let scale = if max_scale >= 0.0 {
            MaxScale::Fixed(max_scale)
        } else {
            MaxScale::Auto
        };
        let cloud = select_landmarks(&(*image).0, pattern);
        put_diagram(rips_persistence(&cloud, scale), dim0, dim1);
        Ok(())
    })
}

/// Creates an empty barcode of homology dimension `dim`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_barcode_new(dim: u8, out: *mut *mut PhBarcode) -> PhStatus {
    guard(|| {
        non_null(out, "out")?;
        put(out, PhBarcode(Barcode::new(dim)));
        Ok(())
    })
}

/// Appends a bar. For an essential bar, `death` is its cap.
///
/// # Safety
/// `barcode` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ph_barcode_push(barcode: *mut PhBarcode, birth: f64, death: f64, essential: bool) -> PhStatus {
    guard(|| {
        non_null(barcode, "barcode")?;
        let bar = lib(if essential {
            Bar::essential(birth, death)
        } else {
            Bar::new(birth, death)
        })?;
        (*barcode).0.push(bar);
        Ok(())
    })
}

/// Number of bars, or 0 for NULL.
///
/// # Safety
/// `barcode` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ph_barcode_len(barcode: *const PhBarcode) -> usize {
    barcode.as_ref().map_or(0, |b| b.0.len())
}

/// Homology dimension, or 0 for NULL.
///
/// # Safety
/// `barcode` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ph_barcode_dim(barcode: *const PhBarcode) -> u8 {
    barcode.as_ref().map_or(0, |b| b.0.dim())
}

/// Copies bar `index` into `out`.
///
/// # Safety
/// `barcode` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ph_barcode_get(barcode: *const PhBarcode, index: usize, out: *mut PhBar) -> PhStatus {
    guard(|| {
        non_null(barcode, "barcode")?;
        non_null(out, "out")?;
        let b = (*barcode).0.bars().get(index).ok_or_else(|| {
            fail(
                PhStatus::InvalidArgument,
                format!("bar index {index} out of range for {} bars", (*barcode).0.len()),
            )
        })?;
        *out = PhBar {
            birth: b.birth,
            death: b.death,
            essential: b.essential,
        };
        Ok(())
    })
}

/// Multiset union of `count` barcodes of one dimension into a new barcode.
///
/// # Safety
/// `items` must point to `count` live handles (it may be NULL when `count`
/// is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_barcode_aggregate(
    items: *const *const PhBarcode,
    count: usize,
    out: *mut *mut PhBarcode,
) -> PhStatus {
    guard(|| {
        non_null(out, "out")?;
        let handles: &[*const PhBarcode] = if count == 0 {
            &[]
        } else {
            non_null(items, "items")?;
            std::slice::from_raw_parts(items, count)
        };
        if let Some(i) = handles.iter().position(|h| h.is_null()) {
            return Err(fail(PhStatus::NullPointer, format!("items[{i}] is null")));
        }
        let merged = lib(aggregate(handles.iter().map(|&h| &(*h).0)))?;
        put(out, PhBarcode(merged));
        Ok(())
    })
}

/// # Safety
/// `barcode` must be NULL or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ph_barcode_free(barcode: *mut PhBarcode) {
    if !barcode.is_null() {
        drop(Box::from_raw(barcode));
    }
}

fn vectorizer(method: PhMethod, gamma: usize, levels: usize, r: u32) -> Result<VectorizerConfig, PhStatus> {
    let cfg = VectorizerConfig {
        method: method.into(),
        gamma,
        levels,
        r,
    };
    lib(cfg.validate())?;
    Ok(cfg)
}

/// Length of the vector [`ph_vectorize`] produces for these parameters.
///
/// # Safety
/// `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ph_vectorize_len(
    method: PhMethod,
    gamma: usize,
    levels: usize,
    r: u32,
    len: *mut usize,
) -> PhStatus {
    guard(|| {
        non_null(len, "len")?;
        *len = vectorizer(method, gamma, levels, r)?.output_len();
        Ok(())
    })
}

/// Vectorizes `barcode` into `out`. Grid methods sample `[t_min, t_max]` at
/// `gamma` points; `levels` applies to landscapes and `r` to tropical
/// coordinates. Returns `PH_STATUS_BUFFER_TOO_SMALL` (and sets `written`
/// to the required length) if `out_len` is short.
///
/// # Safety
/// `barcode` must be a live handle, `out` must point to `out_len` writable
/// doubles, and `written` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ph_vectorize(
    barcode: *const PhBarcode,
    method: PhMethod,
    gamma: usize,
    levels: usize,
    r: u32,
    t_min: f64,
    t_max: f64,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> PhStatus {
    guard(|| {
        non_null(barcode, "barcode")?;
        non_null(out, "out")?;
        non_null(written, "written")?;
        let cfg = vectorizer(method, gamma, levels, r)?;
        let need = cfg.output_len();
        if out_len < need {
            *written = need;
            return Err(fail(
                PhStatus::BufferTooSmall,
                format!("output needs {need} values, buffer holds {out_len}"),
            ));
        }
        let range = lib(Range::new(t_min, t_max))?;
        let v = lib(cfg.apply(&(*barcode).0, range))?;
        std::slice::from_raw_parts_mut(out, v.values.len()).copy_from_slice(&v.values);
        *written = v.values.len();
        Ok(())
    })
}
