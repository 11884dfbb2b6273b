use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use digitsteg_ffi::*;

fn texture(w: usize, h: usize) -> Vec<u8> {
    (0..w * h * 3).map(|i| ((i * 37 + (i / 3) * 11) % 251) as u8).collect()
}

fn new_grid(w: usize, h: usize, bgr: &[u8]) -> *mut DsGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ds_grid_new_from_bgr(w, h, bgr.as_ptr(), bgr.len(), &mut g) }, DsStatus::Ok);
    g
}

fn last_error() -> String {
    let p = ds_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn embed_extract_round_trip() {
    let bgr = texture(40, 30);
    let cover = new_grid(40, 30, &bgr);
    let payload = b"meet me at the bridge";
    let mut rec = ptr::null_mut();
    unsafe {
        assert_eq!(ds_embed(cover, payload.as_ptr(), payload.len(), b'k' as _, true, &mut rec), DsStatus::Ok);
        let stego = ds_record_stego(rec);
        assert_eq!((ds_grid_width(stego), ds_grid_height(stego)), (40, 30));
        assert!((0..3).contains(&ds_record_channel(rec)));
        let (mut col, mut row) = (usize::MAX, usize::MAX);
        assert!(ds_record_overlay_origin(rec, &mut col, &mut row));
        assert!(col < 40 && row < 30);

        let (mut out, mut len) = (ptr::null_mut(), 0usize);
        assert_eq!(ds_extract(stego, b'k' as _, -1, &mut out, &mut len), DsStatus::Ok);
        assert_eq!(std::slice::from_raw_parts(out, len), payload);
        ds_bytes_free(out, len);

        let mut psnr = 0.0;
        assert_eq!(ds_psnr(cover, stego, &mut psnr), DsStatus::Ok);
        assert!(psnr.is_finite() && psnr > 30.0);
        let mut ssim = 0.0;
        assert_eq!(ds_ssim(stego, stego, &mut ssim), DsStatus::Ok);
        assert!((ssim - 1.0).abs() < 1e-12);

        ds_record_free(rec);
        ds_grid_free(cover);
    }
}

#[test]
fn analyze_reports_absent_scores_as_nan() {
    let flat = vec![80u8; 16 * 16 * 3];
    let g = new_grid(16, 16, &flat);
    let mut s = DsScores {
        primary_sets: 0.0,
        chi_square: 0.0,
        sample_pairs: 0.0,
        rs_analysis: 0.0,
        fusion: -1.0,
        crossed_threshold: true,
        estimated_bytes: 1,
    };
    unsafe {
        assert_eq!(ds_analyze(g, 0.2, &mut s), DsStatus::Ok);
        ds_grid_free(g);
    }
    assert!(s.primary_sets.is_nan());
    assert!(s.fusion >= 0.0 && s.fusion <= 1.0);
    assert_eq!(s.crossed_threshold, s.fusion > 0.2);
}

#[test]
fn errors_map_to_status_codes() {
    let bgr = texture(8, 8);
    let g = new_grid(8, 8, &bgr);
    unsafe {
        let mut rec = ptr::null_mut();
        let big = [b'x'; 100];
        assert_eq!(ds_embed(g, big.as_ptr(), big.len(), b'k' as _, false, &mut rec), DsStatus::CapacityExceeded);
        assert!(last_error().contains("capacity"));
        assert_eq!(ds_embed(g, big.as_ptr(), 1, b'7' as _, false, &mut rec), DsStatus::InvalidKey);
        assert_eq!(ds_embed(ptr::null(), big.as_ptr(), 1, b'k' as _, false, &mut rec), DsStatus::NullPointer);

        let (mut out, mut len) = (ptr::null_mut(), 0usize);
        assert_eq!(ds_extract(g, b'k' as _, 5, &mut out, &mut len), DsStatus::InvalidArgument);

        let mut h = ptr::null_mut();
        assert_eq!(ds_grid_new_from_bgr(8, 8, bgr.as_ptr(), 10, &mut h), DsStatus::InvalidArgument);
        let missing = CString::new("/nonexistent/cover.bmp").unwrap();
        assert_eq!(ds_grid_load(missing.as_ptr(), &mut h), DsStatus::FileNotFound);

        let small = new_grid(4, 4, &bgr[..48]);
        let mut v = 0.0;
        assert_eq!(ds_psnr(g, small, &mut v), DsStatus::DimensionMismatch);
        assert_eq!(ds_ssim(small, small, &mut v), DsStatus::ImageTooSmall);
        ds_grid_free(small);
        ds_grid_free(g);
        ds_grid_free(ptr::null_mut());
        ds_record_free(ptr::null_mut());
    }
}

#[test]
fn save_load_and_copy_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("g.bmp").to_str().unwrap()).unwrap();
    let bgr = texture(13, 7);
    let g = new_grid(13, 7, &bgr);
    unsafe {
        assert_eq!(ds_grid_save(g, path.as_ptr()), DsStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(ds_grid_load(path.as_ptr(), &mut back), DsStatus::Ok);
        let mut buf = vec![0u8; bgr.len()];
        assert_eq!(ds_grid_to_bgr(back, buf.as_mut_ptr(), buf.len()), DsStatus::Ok);
        assert_eq!(buf, bgr);
        assert_eq!(ds_grid_to_bgr(back, buf.as_mut_ptr(), 3), DsStatus::InvalidArgument);
        ds_grid_free(back);
        ds_grid_free(g);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("digitsteg.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for f in [
        "ds_last_error_message",
        "ds_grid_load",
        "ds_grid_new_from_bgr",
        "ds_grid_to_bgr",
        "ds_grid_free",
        "ds_grid_width",
        "ds_grid_height",
        "ds_grid_save",
        "ds_embed",
        "ds_record_stego",
        "ds_record_channel",
        "ds_record_overlay_origin",
        "ds_record_free",
        "ds_extract",
        "ds_bytes_free",
        "ds_psnr",
        "ds_ssim",
        "ds_analyze",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(text.contains("typedef struct DsGrid DsGrid;"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(header())
        .status()
    else {
        eprintln!("no C compiler available; skipped");
        return;
    };
    assert!(status.success());
}
