use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use phosphene_ffi::*;

fn fixture() -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/timecourses.csv");
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ph_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn dataset_round_trip_and_descriptive_fit() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(ph_dataset_load(fixture().as_ptr(), &mut ds), PhStatus::Ok);
        let mut n = 0usize;
        assert_eq!(ph_dataset_trial_count(ds, &mut n), PhStatus::Ok);
        assert_eq!(n, 45);

        let (mut subject, mut freq, mut dur, mut len) = (0u32, 0.0, 0.0, 0usize);
        assert_eq!(ph_dataset_trial_info(ds, 0, &mut subject, &mut freq, &mut dur, &mut len), PhStatus::Ok);
        assert_eq!((subject, freq, dur), (1, 5.0, 10.0));
        assert!(len > 40);
        assert_eq!(ph_dataset_trial_info(ds, 45, &mut subject, &mut freq, &mut dur, &mut len), PhStatus::Argument);
        assert!(last_error().contains("out of range"));

        let mut fit = ptr::null_mut();
        assert_eq!(ph_fit_descriptive(ds, 0, PhModel::Baseline, 0, 0, 2, &mut fit), PhStatus::Ok);
        let mut objective = f64::NAN;
        assert_eq!(ph_fit_objective(fit, &mut objective), PhStatus::Ok);
        assert!(objective.is_finite() && objective >= 0.0);

        let mut needed = 0usize;
        assert_eq!(ph_fit_params_json(fit, ptr::null_mut(), 0, &mut needed), PhStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(ph_fit_params_json(fit, buf.as_mut_ptr(), buf.len(), ptr::null_mut()), PhStatus::Ok);
        let json = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        let value: serde_json::Value = serde_json::from_str(json).unwrap();
        assert_eq!(value["model"], "baseline");

        let mut pred = vec![0.0; len];
        assert_eq!(ph_fit_predict(fit, freq, dur, 0.25, len, pred.as_mut_ptr()), PhStatus::Ok);
        assert!(pred.iter().all(|v| *v >= 0.0));
        assert!(pred.iter().any(|v| *v > 0.0));

        ph_fit_free(fit);
        ph_dataset_free(ds);
    }
}

#[test]
fn errors_are_codes_with_messages() {
    unsafe {
        let mut ds = ptr::null_mut();
        let missing = CString::new("/nonexistent/data.csv").unwrap();
        assert_eq!(ph_dataset_load(missing.as_ptr(), &mut ds), PhStatus::Io);
        assert!(ds.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(ph_dataset_load(ptr::null(), &mut ds), PhStatus::NullPointer);
        let mut n = 0usize;
        assert_eq!(ph_dataset_trial_count(ptr::null(), &mut n), PhStatus::NullPointer);
        assert!(last_error().contains("null"));

        ph_dataset_free(ptr::null_mut());
        ph_fit_free(ptr::null_mut());
    }
}

#[test]
fn metrics_through_the_abi() {
    let a = [1.0, 2.0, 3.0, 4.0];
    let b = [1.0, 3.0, 2.0, 4.0];
    let mut out = 0.0;
    unsafe {
        assert_eq!(ph_mse(a.as_ptr(), b.as_ptr(), 4, &mut out), PhStatus::Ok);
        assert_eq!(out, 0.5);
        assert_eq!(ph_pearson_r(a.as_ptr(), b.as_ptr(), 4, &mut out), PhStatus::Ok);
        assert!((out - 0.8).abs() < 1e-15);
        let flat = [2.0; 4];
        assert_eq!(ph_pearson_r(flat.as_ptr(), b.as_ptr(), 4, &mut out), PhStatus::DegenerateVariance);
        assert_eq!(ph_mse(a.as_ptr(), b.as_ptr(), 0, &mut out), PhStatus::Argument);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/phosphene.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "ph_last_error_message",
        "ph_dataset_load",
        "ph_dataset_free",
        "ph_dataset_trial_count",
        "ph_dataset_trial_info",
        "ph_fit_descriptive",
        "ph_fit_free",
        "ph_fit_objective",
        "ph_fit_params_json",
        "ph_fit_predict",
        "ph_mse",
        "ph_pearson_r",
        "typedef struct PhDataset PhDataset",
        "PH_STATUS_BUFFER_TOO_SMALL = 9",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc").args(["-std=c99", "-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(header()).output()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_against_the_static_library() {
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libphosphene_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = profile_dir.join("phosphene_ffi_smoke");
    let Ok(build) = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).arg(fixture().to_str().unwrap()).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("trials=45 objective="), "{stdout}");
    assert!(stdout.contains("predict=0 short=2"), "{stdout}");
}
