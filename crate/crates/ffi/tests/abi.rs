use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use timing_inference_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = ti_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    ti_string_free(p);
    s
}

const TRAJ: &str = r#"{"waypoints":[[0,0,0],[1,0,0],[2,0,0],[3,0,0]],"stamps":[0,0.5,1.5,2.0]}"#;

#[test]
fn trajectory_round_trip() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(ti_trajectory_from_json(c(TRAJ).as_ptr(), &mut t), TiStatus::Ok);
        let mut total = 0.0;
        assert_eq!(ti_trajectory_total_duration(t, &mut total), TiStatus::Ok);
        assert_eq!(total, 2.0);
        let mut n = 0;
        assert_eq!(ti_trajectory_len(t, &mut n), TiStatus::Ok);
        assert_eq!(n, 4);
        let mut s = ptr::null_mut();
        assert_eq!(ti_trajectory_to_json(t, &mut s), TiStatus::Ok);
        let json = take_string(s);
        assert!(json.contains("\"stamps\":[0.0,0.5,1.5,2.0]"), "{json}");
        ti_trajectory_free(t);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut t = ptr::null_mut();
        let bad = c(r#"{"waypoints":[[0],[1]],"stamps":[0.5,1]}"#);
        assert_eq!(ti_trajectory_from_json(bad.as_ptr(), &mut t), TiStatus::InvalidInput);
        assert!(t.is_null());
        assert!(last_error().contains("trajectory"), "{}", last_error());

        assert_eq!(ti_trajectory_from_json(ptr::null(), &mut t), TiStatus::NullOrEncoding);
        assert!(last_error().contains("null"));

        let mut m = ptr::null_mut();
        assert_eq!(
            ti_model_from_json(c(r#"{"model":"mood"}"#).as_ptr(), &mut m),
            TiStatus::InvalidInput
        );

        assert_eq!(
            ti_generate_condition(c("medium_none_pause").as_ptr(), ptr::null(), &mut t),
            TiStatus::InvalidInput
        );

        // a successful call clears the message
        assert_eq!(
            ti_model_from_json(c(r#"{"model":"weight"}"#).as_ptr(), &mut m),
            TiStatus::Ok
        );
        assert!(ti_last_error_message().is_null());
        ti_model_free(m);
    }
}

#[test]
fn posterior_over_generated_family() {
    unsafe {
        let ids = [
            "slow_none_nopause",
            "fast_none_nopause",
            "slow_none_pause",
            "fast_none_pause",
        ];
        let family: Vec<*mut TiTrajectory> = ids
            .iter()
            .map(|id| {
                let mut t = ptr::null_mut();
                assert_eq!(ti_generate_condition(c(id).as_ptr(), ptr::null(), &mut t), TiStatus::Ok);
                t
            })
            .collect();
        let mut m = ptr::null_mut();
        assert_eq!(
            ti_model_from_json(c(r#"{"model":"confidence"}"#).as_ptr(), &mut m),
            TiStatus::Ok
        );
        let mut n = 0;
        assert_eq!(ti_model_support_len(m, &mut n), TiStatus::Ok);
        assert_eq!(n, 2);
        let mut label = ptr::null_mut();
        assert_eq!(ti_model_support_label(m, 0, &mut label), TiStatus::Ok);
        assert_eq!(take_string(label), "high");
        assert_eq!(ti_model_support_label(m, 2, &mut label), TiStatus::InvalidInput);

        let fam: Vec<*const TiTrajectory> = family.iter().map(|p| *p as *const _).collect();
        let mut probs = [0.0; 2];
        assert_eq!(
            ti_model_posterior(m, family[1], fam.as_ptr(), fam.len(), probs.as_mut_ptr(), 2),
            TiStatus::Ok
        );
        assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
        let mut slow = [0.0; 2];
        ti_model_posterior(m, family[0], fam.as_ptr(), fam.len(), slow.as_mut_ptr(), 2);
        assert!(probs[0] > slow[0]);

        let mut small = [0.0; 1];
        assert_eq!(
            ti_model_posterior(m, family[1], fam.as_ptr(), fam.len(), small.as_mut_ptr(), 1),
            TiStatus::BufferTooSmall
        );

        // null family: the trajectory alone
        assert_eq!(
            ti_model_posterior(m, family[1], ptr::null(), 0, probs.as_mut_ptr(), 2),
            TiStatus::Ok
        );

        ti_model_free(m);
        for t in family {
            ti_trajectory_free(t);
        }
    }
}

#[test]
fn optimize_json_returns_report() {
    let req = r#"{
        "path": {"waypoints": [[0,0,0],[1,0,0],[2,0,0],[3,0,0]]},
        "model": {"model": "confidence"},
        "target": "low",
        "constraints": {"min_total_duration": 1.5, "max_total_duration": 3,
                        "min_segment_duration": 0.5, "step": 0.5}
    }"#;
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            ti_optimize_json(c(req).as_ptr(), &mut out),
            TiStatus::Ok,
            "{}",
            last_error()
        );
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["target"], "low");
        assert!(v["posterior"].as_f64().unwrap() > 0.0);

        let bad = req.replace("\"max_total_duration\": 3", "\"max_total_duration\": 1");
        assert_eq!(ti_optimize_json(c(&bad).as_ptr(), &mut out), TiStatus::InvalidInput);
    }
}

#[test]
fn fit_json_returns_result_and_domain_errors() {
    let conds: Vec<(String, String)> = ["slow_none_nopause", "fast_none_nopause", "slow_none_pause"]
        .iter()
        .map(|id| unsafe {
            let mut t = ptr::null_mut();
            ti_generate_condition(c(id).as_ptr(), ptr::null(), &mut t);
            let mut s = ptr::null_mut();
            ti_trajectory_to_json(t, &mut s);
            ti_trajectory_free(t);
            (id.to_string(), take_string(s))
        })
        .collect();
    let conditions = conds
        .iter()
        .map(|(id, j)| format!("\"{id}\": {j}"))
        .collect::<Vec<_>>()
        .join(",");
    let grid = r#"{"params":[{"name":"lambda","low":1,"high":10,"count":3}]}"#;
    let ok = format!(
        r#"{{"model":{{"model":"weight"}},"ratings":{{"slow_none_nopause":5,"fast_none_nopause":2,"slow_none_pause":4}},"conditions":{{{conditions}}},"grid":{grid}}}"#
    );
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(ti_fit_json(c(&ok).as_ptr(), &mut out), TiStatus::Ok, "{}", last_error());
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert!(v["correlation"].as_f64().unwrap() > 0.0);

        let flat = ok
            .replace("\"fast_none_nopause\":2", "\"fast_none_nopause\":5")
            .replace(":4}", ":5}");
        assert_eq!(ti_fit_json(c(&flat).as_ptr(), &mut out), TiStatus::Domain);
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(ti_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// The generated header must compile and link against the static library.
#[test]
fn header_compiles_and_links() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = root.join("include");
    assert!(header_dir.join("timing_inference.h").exists());
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include "timing_inference.h"
#include <stdio.h>
#include <string.h>
int main(void) {
    TiTrajectory *t = NULL;
    TiStatus s = ti_generate_condition("fast_StoF_pause", NULL, &t);
    if (s != TI_STATUS_OK) { printf("%s\n", ti_last_error_message()); return 1; }
    double total = 0;
    ti_trajectory_total_duration(t, &total);
    ti_trajectory_free(t);
    s = ti_trajectory_from_json("{", &t);
    printf("%s %.3f %d\n", ti_version(), total, (int)s);
    return 0;
}
"#,
    )
    .unwrap();

    let syntax = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&header_dir)
        .arg(&src)
        .status()
        .unwrap();
    assert!(syntax.success(), "header failed to compile");

    // target/<profile>/ holds the static library next to the test's deps dir
    let exe = std::env::current_exe().unwrap();
    let lib = exe
        .parent()
        .and_then(|d| d.parent())
        .unwrap()
        .join("libtiming_inference_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping link check", lib.display());
        return;
    }
    let bin = tmp.path().join("main");
    let linked = Command::new(cc)
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(linked.success(), "link failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
    assert!(text.trim_end().ends_with(" 2"), "{text}");
}
