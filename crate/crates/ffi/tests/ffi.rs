use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use thresnet_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = thresnet_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    thresnet_string_free(p);
    s
}

const THRESHOLD_HALF: &str =
    r#"{"clauses":[{"connector":"sum","set":[{"lo":0.5,"lo_open":true,"hi":"inf"}]}]}"#;

fn model(law: &str, rule: &str) -> *mut ThresnetModel {
    let mut m = ptr::null_mut();
    let st = unsafe { thresnet_model_new(c(law).as_ptr(), c(rule).as_ptr(), &mut m) };
    assert_eq!(st, ThresnetStatus::Ok);
    m
}

#[test]
fn complete_graph_counts() {
    unsafe {
        let m = model(r#"{"kind":"bernoulli","p":1.0}"#, THRESHOLD_HALF);
        let mut g = ptr::null_mut();
        assert_eq!(thresnet_graph_generate(m, 6, 1, &mut g), ThresnetStatus::Ok);
        assert_eq!(thresnet_graph_vertex_count(g), 6);
        assert_eq!(thresnet_graph_edge_count(g), 15);
        let mut total = 0u64;
        let fam = c(r#"{"name":"triangle"}"#);
        assert_eq!(
            thresnet_census_total(g, fam.as_ptr(), &mut total),
            ThresnetStatus::Ok
        );
        assert_eq!(total, 20);
        let mut cc = 0.0;
        assert_eq!(thresnet_global_cc(g, 0.0, &mut cc), ThresnetStatus::Ok);
        assert_eq!(cc, 1.0);
        let mut json = ptr::null_mut();
        assert_eq!(
            thresnet_census_json(g, fam.as_ptr(), &mut json),
            ThresnetStatus::Ok
        );
        let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(v["per_vertex"], serde_json::json!([10, 10, 10, 10, 10, 10]));
        thresnet_graph_free(g);
        thresnet_model_free(m);
    }
}

#[test]
fn edges_and_clustering() {
    // Triangle 0-1-2 with a pendant vertex 3 on 2.
    let edges: [u32; 8] = [0, 1, 1, 2, 0, 2, 2, 3];
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(
            thresnet_graph_from_edges(4, edges.as_ptr(), 4, &mut g),
            ThresnetStatus::Ok
        );
        let mut d = 0;
        assert_eq!(thresnet_graph_degree(g, 2, &mut d), ThresnetStatus::Ok);
        assert_eq!(d, 3);
        let mut x = 0.0;
        assert_eq!(thresnet_local_cc(g, 2, 0.0, &mut x), ThresnetStatus::Ok);
        assert!((x - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(thresnet_local_cc(g, 3, 0.25, &mut x), ThresnetStatus::Ok);
        assert_eq!(x, 0.25);
        assert_eq!(thresnet_filtered_cc(g, &mut x), ThresnetStatus::Ok);
        assert!((x - (1.0 + 1.0 + 1.0 / 3.0) / 3.0).abs() < 1e-15);
        assert_eq!(
            thresnet_graph_degree(g, 9, &mut d),
            ThresnetStatus::InvalidInput
        );
        assert!(last_error().contains("out of range"));
        thresnet_graph_free(g);
    }
}

#[test]
fn degree_law_json_has_the_atom() {
    unsafe {
        let rule =
            r#"{"clauses":[{"connector":"sum","set":[{"lo":1.0,"lo_open":true,"hi":"inf"}]}]}"#;
        let m = model(r#"{"kind":"exponential","lambda":1.0}"#, rule);
        let mut out = ptr::null_mut();
        assert_eq!(thresnet_degree_law_json(m, &mut out), ThresnetStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["atoms"][0]["at"], 1.0);
        assert!((v["atoms"][0]["mass"].as_f64().unwrap() - (-1.0f64).exp()).abs() < 1e-12);
        thresnet_model_free(m);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut m = ptr::null_mut();
        let st = thresnet_model_new(
            c(r#"{"kind":"bernoulli","p":1.3}"#).as_ptr(),
            c(THRESHOLD_HALF).as_ptr(),
            &mut m,
        );
        assert_eq!(st, ThresnetStatus::InvalidInput);
        assert!(m.is_null());
        assert!(last_error().contains("p = 1.3"));

        let st = thresnet_model_new(ptr::null(), c(THRESHOLD_HALF).as_ptr(), &mut m);
        assert_eq!(st, ThresnetStatus::NullPointer);

        let bad = [0xffu8, 0];
        let st = thresnet_model_new(bad.as_ptr().cast(), c(THRESHOLD_HALF).as_ptr(), &mut m);
        assert_eq!(st, ThresnetStatus::InvalidUtf8);

        let st = thresnet_model_new(c("{").as_ptr(), c(THRESHOLD_HALF).as_ptr(), &mut m);
        assert_eq!(st, ThresnetStatus::InvalidInput);

        let ok = model(r#"{"kind":"uniform01"}"#, THRESHOLD_HALF);
        assert!(thresnet_last_error_message().is_null());
        thresnet_model_free(ok);

        let mut x = 0.0;
        assert_eq!(
            thresnet_global_cc(ptr::null(), 0.0, &mut x),
            ThresnetStatus::NullPointer
        );
        thresnet_model_free(ptr::null_mut());
        thresnet_graph_free(ptr::null_mut());
        thresnet_string_free(ptr::null_mut());
    }
}

#[test]
fn run_json_matches_library() {
    let config = r#"{"law":{"kind":"bernoulli","p":1.0},
        "rule":{"clauses":[{"connector":"sum","set":[{"lo":0.5,"lo_open":true,"hi":"inf"}]}]},
        "n":5,"seed":3}"#;
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            thresnet_run_json(c("generate").as_ptr(), c(config).as_ptr(), &mut out),
            ThresnetStatus::Ok
        );
        assert_eq!(take_string(out).lines().count(), 10);

        let strict = r#"{"law":{"kind":"bernoulli","p":0.5},
            "rule":{"clauses":[{"connector":"sum","set":[{"lo":0.5,"lo_open":true,"hi":"inf"}]}]},
            "n_grid":[10,20],"replications":2,"seed":1,"tolerance":1e-300}"#;
        let st = thresnet_run_json(c("slln").as_ptr(), c(strict).as_ptr(), &mut out);
        assert_eq!(st, ThresnetStatus::StatisticalFailure);
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["pass"], false);

        let st = thresnet_run_json(c("bogus").as_ptr(), c(config).as_ptr(), &mut out);
        assert_eq!(st, ThresnetStatus::InvalidInput);
        assert!(out.is_null());
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(thresnet_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent()
        .and_then(|deps| deps.parent())
        .unwrap()
        .to_path_buf()
}

#[test]
fn c_program_links_against_header() {
    let lib = profile_dir().join("libthresnet_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "thresnet.h"

int main(void) {
    const char *law = "{\"kind\":\"bernoulli\",\"p\":1.0}";
    const char *rule = "{\"clauses\":[{\"connector\":\"sum\",\"set\":[{\"lo\":0.5,\"lo_open\":true,\"hi\":\"inf\"}]}]}";
    ThresnetModel *model = NULL;
    if (thresnet_model_new(law, rule, &model) != THRESNET_STATUS_OK) return 1;
    ThresnetGraph *graph = NULL;
    if (thresnet_graph_generate(model, 5, 7, &graph) != THRESNET_STATUS_OK) return 2;
    uint64_t triangles = 0;
    if (thresnet_census_total(graph, "{\"name\":\"triangle\"}", &triangles) != THRESNET_STATUS_OK) return 3;
    if (thresnet_census_total(graph, "{\"name\":\"nope\"}", &triangles) != THRESNET_STATUS_INVALID_INPUT) return 4;
    if (strstr(thresnet_last_error_message(), "nope") == NULL) return 5;
    printf("%llu %llu\n", (unsigned long long)thresnet_graph_edge_count(graph), (unsigned long long)triangles);
    thresnet_graph_free(graph);
    thresnet_model_free(model);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "10 10\n");
}
