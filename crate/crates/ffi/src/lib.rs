//! C ABI over the `digitsteg` crate.
//!
//! Images and embedding results are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`DsStatus`]; the message
//! of the last failure on the calling thread is available from
//! [`ds_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use digitsteg::codec::{self, ChannelChoice, EmbedRecord};
use digitsteg::{imageio, metrics, steganalysis, CaesarKey, Channel, Error, PixelGrid};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    FileNotFound = 3,
    UnsupportedFormat = 4,
    CorruptImage = 5,
    InvalidKey = 6,
    CapacityExceeded = 7,
    NoPayloadFound = 8,
    PayloadOutOfRange = 9,
    ImageTooSmall = 10,
    OverlayError = 11,
    DimensionMismatch = 12,
    Io = 13,
    Panic = 14,
}

impl From<&Error> for DsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::FileNotFound(_) | Error::EmptyCorpus(_) => DsStatus::FileNotFound,
            Error::UnsupportedFormat(_) => DsStatus::UnsupportedFormat,
            Error::CorruptImage(_) => DsStatus::CorruptImage,
            Error::InvalidGrid(_) | Error::BadChannelIndex(_) | Error::EmptyInput => DsStatus::InvalidArgument,
            Error::InvalidKey(_) => DsStatus::InvalidKey,
            Error::CapacityExceeded { .. } | Error::PayloadTooLong(_) => DsStatus::CapacityExceeded,
            Error::NoPayloadFound => DsStatus::NoPayloadFound,
            Error::OutOfRange { .. } => DsStatus::PayloadOutOfRange,
            Error::ImageTooSmall { .. } => DsStatus::ImageTooSmall,
            Error::GlyphMissing(_)
            | Error::OverlayOutOfBounds { .. }
            | Error::InvalidOffset(_)
            | Error::GlyphParse { .. } => DsStatus::OverlayError,
            Error::DimensionMismatch(..) => DsStatus::DimensionMismatch,
            Error::Io(_) => DsStatus::Io,
        }
    }
}

/// An image held as three colour planes.
pub struct DsGrid(PixelGrid);

/// The outcome of an embedding.
pub struct DsRecord {
    stego: DsGrid,
    record: EmbedRecord,
}

/// Detector outputs; absent scores are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DsScores {
    pub primary_sets: f64,
    pub chi_square: f64,
    pub sample_pairs: f64,
    pub rs_analysis: f64,
    pub fusion: f64,
    pub crossed_threshold: bool,
    pub estimated_bytes: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), DsStatus>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            DsStatus::Panic
        }
    }
}

fn fail(e: Error) -> DsStatus {
    set_error(e.to_string());
    DsStatus::from(&e)
}

fn null(what: &str) -> DsStatus {
    set_error(format!("{what} is NULL"));
    DsStatus::NullPointer
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, DsStatus> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path).to_str().map_err(|_| {
        set_error("path is not valid UTF-8");
        DsStatus::InvalidArgument
    })
}

unsafe fn grid_arg<'a>(grid: *const DsGrid, what: &str) -> Result<&'a PixelGrid, DsStatus> {
    grid.as_ref().map(|g| &g.0).ok_or_else(|| null(what))
}

fn key_arg(key: c_char) -> Result<CaesarKey, DsStatus> {
    CaesarKey::new(char::from(key as u8)).map_err(fail)
}

fn channel_arg(channel: i32) -> Result<ChannelChoice, DsStatus> {
    match channel {
        -1 => Ok(ChannelChoice::Auto),
        c => usize::try_from(c)
            .map_err(|_| Error::BadChannelIndex(usize::MAX))
            .and_then(Channel::from_index)
            .map(ChannelChoice::Fixed)
            .map_err(fail),
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a 24-bit BMP.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ds_grid_load(path: *const c_char, out: *mut *mut DsGrid) -> DsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = imageio::load_image(path_arg(path)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(DsGrid(grid)));
        Ok(())
    })
}

/// Builds an image from interleaved B,G,R bytes, row-major from the top row.
///
/// # Safety
/// `bgr` must point to `len` readable bytes and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ds_grid_new_from_bgr(
    width: usize,
    height: usize,
    bgr: *const u8,
    len: usize,
    out: *mut *mut DsGrid,
) -> DsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if bgr.is_null() {
            return Err(null("bgr"));
        }
        let grid = PixelGrid::from_bgr(width, height, std::slice::from_raw_parts(bgr, len)).map_err(fail)?;
        *out = Box::into_raw(Box::new(DsGrid(grid)));
        Ok(())
    })
}

/// Copies the image as interleaved B,G,R bytes into `buf`, which must hold
/// `width * height * 3` bytes.
///
/// # Safety
/// `grid` must be a live handle and `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ds_grid_to_bgr(grid: *const DsGrid, buf: *mut u8, len: usize) -> DsStatus {
    guard(|| {
        let grid = grid_arg(grid, "grid")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let bgr = grid.to_bgr();
        if len < bgr.len() {
            set_error(format!("buffer of {len} bytes is smaller than {}", bgr.len()));
            return Err(DsStatus::InvalidArgument);
        }
        ptr::copy_nonoverlapping(bgr.as_ptr(), buf, bgr.len());
        Ok(())
    })
}

/// # Safety
/// `grid` must be NULL or a handle not yet freed. Handles obtained from
/// [`ds_record_stego`] belong to their record and must not be passed here.
#[no_mangle]
pub unsafe extern "C" fn ds_grid_free(grid: *mut DsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Width in pixels, 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_grid_width(grid: *const DsGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.width())
}

/// Height in pixels, 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_grid_height(grid: *const DsGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.height())
}

/// Writes the image as a 24-bit BMP.
///
/// # Safety
/// `grid` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ds_grid_save(grid: *const DsGrid, path: *const c_char) -> DsStatus {
    guard(|| {
        let grid = grid_arg(grid, "grid")?;
        imageio::save_image(grid, path_arg(path)?).map_err(fail)
    })
}

/// Embeds `payload` under the one-letter `key`, drawing the key overlay when
/// `overlay` is true.
///
/// # Safety
/// `cover` must be a live handle, `payload` must point to `len` bytes (it may
/// be NULL when `len` is 0) and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ds_embed(
    cover: *const DsGrid,
    payload: *const u8,
    len: usize,
    key: c_char,
    overlay: bool,
    out: *mut *mut DsRecord,
) -> DsStatus {
    guard(|| {
        let cover = grid_arg(cover, "cover")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let payload: &[u8] = match (payload.is_null(), len) {
            (_, 0) => &[],
            (true, _) => return Err(null("payload")),
            (false, n) => std::slice::from_raw_parts(payload, n),
        };
        let record = codec::embed(cover, payload, key_arg(key)?, overlay).map_err(fail)?;
        let stego = DsGrid(record.stego.clone());
        *out = Box::into_raw(Box::new(DsRecord { stego, record }));
        Ok(())
    })
}

/// The stego image, owned by the record.
///
/// # Safety
/// `record` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_record_stego(record: *const DsRecord) -> *const DsGrid {
    record.as_ref().map_or(ptr::null(), |r| &r.stego as *const DsGrid)
}

/// Payload channel: 0 blue, 1 green, 2 red; -1 for NULL.
///
/// # Safety
/// `record` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_record_channel(record: *const DsRecord) -> i32 {
    record.as_ref().map_or(-1, |r| r.record.channel.index() as i32)
}

/// Top-left corner of the key overlay. Returns false when no overlay was drawn.
///
/// # Safety
/// `record` must be NULL or a live handle; `col` and `row` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ds_record_overlay_origin(record: *const DsRecord, col: *mut usize, row: *mut usize) -> bool {
    match (record.as_ref().and_then(|r| r.record.overlay_origin()), col.is_null() || row.is_null()) {
        (Some((c, r)), false) => {
            *col = c;
            *row = r;
            true
        }
        _ => false,
    }
}

/// # Safety
/// `record` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_record_free(record: *mut DsRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Extracts a payload. `channel` is 0, 1 or 2, or -1 to search. The bytes
/// are returned in a buffer released with [`ds_bytes_free`].
///
/// # Safety
/// `stego` must be a live handle; `out` and `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ds_extract(
    stego: *const DsGrid,
    key: c_char,
    channel: i32,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> DsStatus {
    guard(|| {
        let stego = grid_arg(stego, "stego")?;
        if out.is_null() || out_len.is_null() {
            return Err(null("out"));
        }
        let payload = codec::extract(stego, key_arg(key)?, channel_arg(channel)?).map_err(fail)?;
        *out_len = payload.len();
        *out = Box::into_raw(payload.into_boxed_slice()) as *mut u8;
        Ok(())
    })
}

/// # Safety
/// `bytes` and `len` must come from one [`ds_extract`] call, or `bytes` is NULL.
#[no_mangle]
pub unsafe extern "C" fn ds_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// PSNR in dB; infinite for identical images.
///
/// # Safety
/// `a` and `b` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ds_psnr(a: *const DsGrid, b: *const DsGrid, out: *mut f64) -> DsStatus {
    guard(|| {
        let (a, b) = (grid_arg(a, "a")?, grid_arg(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = metrics::psnr(a, b).map_err(fail)?;
        Ok(())
    })
}

/// Mean SSIM of the grayscale images.
///
/// # Safety
/// `a` and `b` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ds_ssim(a: *const DsGrid, b: *const DsGrid, out: *mut f64) -> DsStatus {
    guard(|| {
        let (a, b) = (grid_arg(a, "a")?, grid_arg(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = metrics::ssim(a, b).map_err(fail)?;
        Ok(())
    })
}

/// Runs the four detectors and fuses them against `threshold`.
///
/// # Safety
/// `grid` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ds_analyze(grid: *const DsGrid, threshold: f64, out: *mut DsScores) -> DsStatus {
    guard(|| {
        let grid = grid_arg(grid, "grid")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = steganalysis::analyze(grid, threshold);
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *out = DsScores {
            primary_sets: nan(s.primary_sets),
            chi_square: nan(s.chi_square),
            sample_pairs: nan(s.sample_pairs),
            rs_analysis: nan(s.rs_analysis),
            fusion: s.fusion,
            crossed_threshold: s.crossed_threshold,
            estimated_bytes: s.estimated_bytes,
        };
        Ok(())
    })
}
