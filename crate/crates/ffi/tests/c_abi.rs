use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use jsdm_ffi::*;

fn scenario_path(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios").join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = jsdm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn select_two_user_example() {
    unsafe {
        let mut s = ptr::null_mut();
        let path = scenario_path("sec4c_two_user_example.toml");
        assert_eq!(jsdm_scenario_load(path.as_ptr(), &mut s), JsdmStatus::Ok);
        assert_eq!(jsdm_scenario_profile_count(s), 2);
        let mut sel = ptr::null_mut();
        assert_eq!(jsdm_select(s, &mut sel), JsdmStatus::Ok);
        assert_eq!(jsdm_selection_count(sel), 1);
        assert_eq!(jsdm_selection_is_selected(sel, 0), 0);
        assert_eq!(jsdm_selection_is_selected(sel, 1), 1);
        assert_eq!(jsdm_selection_is_selected(sel, 2), -1);
        assert!((jsdm_selection_objective(sel) - 0.3).abs() < 1e-6);
        jsdm_selection_free(sel);
        jsdm_scenario_free(s);
    }
}

#[test]
fn sweep_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().join("r.csv").to_str().unwrap()).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        let path = scenario_path("sec4c_two_user_example.toml");
        assert_eq!(jsdm_scenario_load(path.as_ptr(), &mut s), JsdmStatus::Ok);
        assert_eq!(jsdm_scenario_set_trials(s, 3), JsdmStatus::Ok);
        assert_eq!(jsdm_scenario_set_trials(s, 0), JsdmStatus::InvalidArgument);
        assert_eq!(jsdm_scenario_set_seed(s, 9), JsdmStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(jsdm_sweep(s, &mut r), JsdmStatus::Ok);
        assert_eq!(jsdm_results_series_count(r), 1);
        assert_eq!(jsdm_results_point_count(r, 0), 3);
        let mut p = JsdmPoint {
            grid_db: 0.0,
            sum_rate_bps_hz: 0.0,
            sum_rate_stderr: 0.0,
            users_served_mean: 0.0,
        };
        assert_eq!(jsdm_results_point(r, 0, 2, &mut p), JsdmStatus::Ok);
        assert_eq!(p.grid_db, 20.0);
        assert!(p.sum_rate_bps_hz > 0.0);
        assert_eq!(jsdm_results_point(r, 0, 3, &mut p), JsdmStatus::InvalidArgument);
        assert_eq!(jsdm_results_export_csv(r, out.as_ptr()), JsdmStatus::Ok);
        jsdm_results_free(r);
        jsdm_scenario_free(s);
    }
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(text.starts_with("grid_db,mode,algorithm,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(jsdm_scenario_load(ptr::null(), &mut s), JsdmStatus::NullPointer);
        assert!(s.is_null());
        let missing = CString::new("/nonexistent/x.toml").unwrap();
        assert_eq!(jsdm_scenario_load(missing.as_ptr(), &mut s), JsdmStatus::Io);
        assert!(last_error().contains("/nonexistent/x.toml"));
        let mut sel = ptr::null_mut();
        assert_eq!(jsdm_select(ptr::null(), &mut sel), JsdmStatus::NullPointer);
        assert!(last_error().contains("null"));
        jsdm_scenario_free(ptr::null_mut());
        jsdm_results_free(ptr::null_mut());
        jsdm_selection_free(ptr::null_mut());
    }
}

#[test]
fn schema_errors_map_to_parse() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.toml");
    std::fs::write(&f, "[geometry]\nD = 0.5\n[eval]\nsnr_db = [0.0]\n").unwrap();
    let c = CString::new(f.to_str().unwrap()).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(jsdm_scenario_load(c.as_ptr(), &mut s), JsdmStatus::Parse);
    }
    assert!(last_error().contains("geometry.M"));
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(jsdm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/jsdm.h"))
        .unwrap();
    for name in [
        "jsdm_scenario_load",
        "jsdm_select",
        "jsdm_sweep",
        "jsdm_compare",
        "jsdm_results_export_csv",
        "jsdm_last_error",
        "JSDM_STATUS_OK",
        "typedef struct JsdmScenario JsdmScenario",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

/// Directory holding the static library built alongside this test binary.
fn artifact_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?.to_path_buf();
    dir.join("libjsdm_ffi.a").exists().then_some(dir)
}

#[test]
fn c_program_links_against_header() {
    let (Some(lib), Ok(_)) = (artifact_dir(), Command::new("cc").arg("--version").output()) else {
        println!("skipped: no C compiler or static library");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "jsdm.h"
int main(int argc, char **argv) {
    JsdmScenario *s = NULL;
    if (jsdm_scenario_load(argv[1], &s) != JSDM_STATUS_OK) {
        fprintf(stderr, "%s\n", jsdm_last_error());
        return 1;
    }
    JsdmSelection *sel = NULL;
    if (jsdm_select(s, &sel) != JSDM_STATUS_OK) return 1;
    printf("%zu %d\n", jsdm_selection_count(sel), jsdm_selection_is_selected(sel, 1));
    jsdm_selection_free(sel);
    jsdm_scenario_free(s);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(lib.join("libjsdm_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe)
        .arg(scenario_path("sec4c_two_user_example.toml").to_str().unwrap())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1 1");
}
