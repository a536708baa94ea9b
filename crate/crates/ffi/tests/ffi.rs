use std::f64::consts::PI;
use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use minlen_ffi::*;

fn kmm() -> *mut MinlenMap {
    let mut map = ptr::null_mut();
    let status = unsafe { minlen_map_new(MinlenKind::Kmm, 1.0, ptr::null(), 0, 1e-12, &mut map) };
    assert_eq!(status, MinlenStatus::Ok);
    assert!(!map.is_null());
    map
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(minlen_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn kmax_and_momentum() {
    let map = kmm();
    let mut k = 0.0;
    let mut p = 0.0;
    unsafe {
        assert_eq!(minlen_map_kmax(map, &mut k), MinlenStatus::Ok);
        assert_eq!(minlen_map_eval_p(map, 0.5, &mut p), MinlenStatus::Ok);
        minlen_map_free(map);
    }
    assert!((k - PI / 2.0).abs() < 1e-10);
    assert!((p - 0.5f64.tan()).abs() < 1e-9);
}

#[test]
fn solve_and_minimal_lengths() {
    let map = kmm();
    let mut s = MinlenSolution::default();
    let mut var = 0.0;
    let mut hmin = 0.0;
    unsafe {
        assert_eq!(minlen_solve(map, 1.0, 1024, 1e-10, &mut s), MinlenStatus::Ok);
        assert_eq!(minlen_minimal_length_variance(map, &mut var), MinlenStatus::Ok);
        assert_eq!(minlen_min_entropy_minlength(map, &mut hmin), MinlenStatus::Ok);
        minlen_map_free(map);
    }
    assert!((s.delta_x - 1.0).abs() < 1e-6);
    assert_eq!(var, 1.0);
    assert_eq!(hmin, 2f64.ln());
}

#[test]
fn tradeoff_buffer_protocol() {
    let map = kmm();
    let mut written = 0;
    let mut points = vec![MinlenTradeoffPoint::default(); 8];
    unsafe {
        let status = minlen_tradeoff(map, 8, 1e-3, points.as_mut_ptr(), 4, &mut written);
        assert_eq!(status, MinlenStatus::BufferTooSmall);
        assert_eq!(written, 8);
        let status = minlen_tradeoff(map, 8, 1e-3, points.as_mut_ptr(), points.len(), &mut written);
        assert_eq!(status, MinlenStatus::Ok);
        minlen_map_free(map);
    }
    assert_eq!(points[7].lambda, 1.0);
    assert!((points[7].delta_x - 1.0).abs() < 1e-6);
    assert!(points.windows(2).all(|w| w[0].delta_x > w[1].delta_x));
}

#[test]
fn errors_map_to_status_codes() {
    let mut map = ptr::null_mut();
    unsafe {
        assert_eq!(minlen_map_new(MinlenKind::Kmm, -1.0, ptr::null(), 0, 1e-12, &mut map), MinlenStatus::InvalidInput);
        assert!(map.is_null());
        assert!(last_error().contains("beta"));

        assert_eq!(minlen_map_new(MinlenKind::Poly, 1.0, ptr::null(), 2, 1e-12, &mut map), MinlenStatus::NullPointer);
        assert_eq!(minlen_map_kmax(ptr::null(), ptr::null_mut()), MinlenStatus::NullPointer);
        assert_eq!(minlen_cos_power_hk(1.0, -1.0, &mut 0.0), MinlenStatus::Domain);

        // f ≡ 1 has no cut-off.
        assert_eq!(minlen_map_new(MinlenKind::Poly, 1.0, ptr::null(), 0, 1e-12, &mut map), MinlenStatus::Ok);
        let mut k = 0.0;
        assert_eq!(minlen_map_kmax(map, &mut k), MinlenStatus::Ok);
        assert!(k.is_infinite());
        assert_eq!(minlen_minimal_length_variance(map, &mut 0.0), MinlenStatus::Unbounded);
        assert!(!last_error().is_empty());
        minlen_map_free(map);
        minlen_map_free(ptr::null_mut());

        let mut h = 0.0;
        assert_eq!(minlen_cos_power_hk(1.0, 0.5, &mut h), MinlenStatus::Ok);
        assert!(last_error().is_empty());
        assert!((h - 1.0).abs() < 1e-12);
    }
    let version = unsafe { CStr::from_ptr(minlen_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/minlen.h")).unwrap();
    for name in [
        "minlen_map_new",
        "minlen_map_free",
        "minlen_map_kmax",
        "minlen_map_eval_p",
        "minlen_solve",
        "minlen_tradeoff",
        "minlen_minimal_length_variance",
        "minlen_min_entropy_minlength",
        "minlen_cos_power_hk",
        "minlen_last_error",
        "minlen_version",
        "typedef struct MinlenMap MinlenMap;",
        "MINLEN_STATUS_BUFFER_TOO_SMALL = 8",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Directory holding the library artifacts of this build (`target/<profile>`).
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = artifact_dir().join("libminlen_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include "minlen.h"
int main(void) {
    MinlenMap *map = NULL;
    if (minlen_map_new(MINLEN_KIND_COSH, 1.0, NULL, 0, 1e-12, &map) != MINLEN_STATUS_OK) return 1;
    double k = 0.0;
    if (minlen_map_kmax(map, &k) != MINLEN_STATUS_OK) return 2;
    minlen_map_free(map);
    if (fabs(k - 1.5707963267948966) > 1e-8) return 3;
    if (minlen_map_kmax(NULL, &k) != MINLEN_STATUS_NULL_POINTER) return 4;
    printf("%s %.12f\n", minlen_version(), k);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("probe");
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = Command::new("cc")
        .arg(&src)
        .arg(format!("-I{include}"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status();
    let Ok(status) = status else {
        eprintln!("skipping: no C compiler");
        return;
    };
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with("1.570796326795\n"), "{text}");
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("minlen-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
