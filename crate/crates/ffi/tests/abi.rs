use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use enclosure_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { enclosure_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn s1_session_geometry_queries() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { enclosure_session_s1(&mut s) }, EnclosureStatus::Ok);
    let mut threshold = 0.0;
    assert_eq!(
        unsafe { enclosure_decay_threshold(s, &mut threshold) },
        EnclosureStatus::Ok
    );
    assert!((threshold - 5.735917).abs() < 1e-5);

    let (mut q, mut n) = ([0.0; 3], [0.0; 3]);
    assert_eq!(
        unsafe { enclosure_first_reflector(s, q.as_mut_ptr(), n.as_mut_ptr()) },
        EnclosureStatus::Ok
    );
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((q[0] - h).abs() < 1e-7 && (q[1] - h).abs() < 1e-7 && q[2].abs() < 1e-7);

    assert_eq!(
        unsafe { enclosure_session_set_mode(s, EnclosureMode::Geometry) },
        EnclosureStatus::Ok
    );
    let (mut center, mut radius) = ([1.0; 3], 0.0);
    assert_eq!(
        unsafe { enclosure_reconstruct_ball(s, center.as_mut_ptr(), &mut radius) },
        EnclosureStatus::Ok
    );
    assert!((radius - 1.0).abs() < 1e-6 && center.iter().all(|c| c.abs() < 1e-6));

    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { enclosure_report_json(s, EnclosureReport::Curvature, ptr::null(), &mut json) },
        EnclosureStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { enclosure_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["gauss"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    unsafe { enclosure_session_free(s) };
}

#[test]
fn semianalytic_enclose() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { enclosure_session_s1(&mut s) }, EnclosureStatus::Ok);
    let (mut rate, mut unc) = (0.0, 0.0);
    assert_eq!(
        unsafe { enclosure_enclose(s, &mut rate, &mut unc) },
        EnclosureStatus::Ok
    );
    assert!((rate - 5.73590).abs() < 1e-3 && unc > 0.0);
    unsafe { enclosure_session_free(s) };
}

#[test]
fn errors_carry_status_and_message() {
    let bad = CString::new(
        r#"{"obstacle": {"kind": "sphere", "center": [0,0,0], "radius": 1},
            "source": {"center": [1.2,0,0], "radius": 0.5},
            "receiver": {"center": [0,4,0], "radius": 0.5}}"#,
    )
    .unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { enclosure_session_from_json(bad.as_ptr(), ptr::null(), &mut s) };
    assert_eq!(st, EnclosureStatus::HypothesisViolated);
    assert!(s.is_null());
    assert!(last_error().contains("hull condition"));

    let garbage = CString::new("{").unwrap();
    let st = unsafe { enclosure_session_from_json(garbage.as_ptr(), ptr::null(), &mut s) };
    assert_eq!(st, EnclosureStatus::InvalidConfig);

    let st = unsafe { enclosure_session_from_json(ptr::null(), ptr::null(), &mut s) };
    assert_eq!(st, EnclosureStatus::NullArgument);

    // FDTD mode without a trace is reported, not a crash.
    assert_eq!(unsafe { enclosure_session_s1(&mut s) }, EnclosureStatus::Ok);
    assert_eq!(
        unsafe { enclosure_session_set_mode(s, EnclosureMode::Fdtd) },
        EnclosureStatus::Ok
    );
    let st = unsafe { enclosure_enclose(s, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, EnclosureStatus::InvalidConfig);
    assert!(last_error().contains("trace"));
    unsafe { enclosure_session_free(s) };
}

#[test]
fn yukawa_ball_inside_value() {
    // At the center: (1 - (1 + τη) e^{-τη}) / τ².
    let (c, x) = ([0.0; 3], [0.0; 3]);
    let mut v = 0.0;
    let st = unsafe { enclosure_yukawa_ball(c.as_ptr(), 0.5, 2.0, x.as_ptr(), &mut v) };
    assert_eq!(st, EnclosureStatus::Ok);
    let expect = (1.0 - 2.0 * (-1.0f64).exp()) / 4.0;
    assert!((v - expect).abs() < 1e-14, "{v} vs {expect}");
    let st = unsafe { enclosure_yukawa_ball(c.as_ptr(), -1.0, 2.0, x.as_ptr(), &mut v) };
    assert_eq!(st, EnclosureStatus::InvalidConfig);
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(enclosure_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.parent().unwrap().join("libenclosure_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "enclosure.h"
int main(void) {
    EnclosureSession *s = NULL;
    if (enclosure_session_s1(&s) != ENCLOSURE_STATUS_OK) return 1;
    double t = 0.0;
    if (enclosure_decay_threshold(s, &t) != ENCLOSURE_STATUS_OK) return 2;
    enclosure_session_free(s);
    printf("%.6f\n", t);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5.735917");
}
