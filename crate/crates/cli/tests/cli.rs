use std::process::{Command, Output};

use serde_json::Value;

fn hecke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hecke")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = hecke(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let name = args[0];
    if name != "verify" {
        assert_eq!(v["schema"], format!("hecke.{name}.v1"));
    }
    v
}

#[test]
fn x0_level_11_at_3() {
    let v = json(&["x0", "--level", "11", "--p", "3"]);
    assert_eq!(v["exact"], 5);
    assert_eq!(v["predictor"]["q"], 3);
    assert!(v["predictor"]["error_envelope"].as_f64().unwrap() > 0.0);
}

#[test]
fn x0_genus_zero_is_q_plus_one() {
    let v = json(&["x0", "--level", "7", "--p", "3", "--v", "2"]);
    assert_eq!(v["exact"], 10);
}

#[test]
fn zeroth_moment_is_one() {
    let v = json(&["moments", "--q", "101", "--j", "0"]);
    assert_eq!(v["moments"][0]["expectation_exact"], "1");
}

#[test]
fn delta_vanishes_in_weight_4() {
    let v = json(&["delta", "--kappa", "4", "--level", "1", "--m", "1", "--n", "1"]);
    let r = &v["result"];
    let re = r["value"]["re"].as_f64().unwrap();
    let im = r["value"]["im"].as_f64().unwrap();
    assert!(re.hypot(im) <= r["tail_bound"].as_f64().unwrap() + 1e-6);
    assert_eq!(r["certified"], true);
}

#[test]
fn kloosterman_reports_weil_bound() {
    let v = json(&["kloosterman", "--a", "1", "--b", "1", "--c", "3"]);
    assert!((v["value_re"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!(v["weil_bound"].as_f64().unwrap() >= 1.0);
    let t = json(&["kloosterman", "--a", "-2", "--b", "5", "--c", "20", "--char-modulus", "5", "--char-index", "1"]);
    assert!(t["value_re"].as_f64().unwrap().hypot(t["value_im"].as_f64().unwrap()) <= t["weil_bound"].as_f64().unwrap());
}

#[test]
fn characters_list_values() {
    let v = json(&["characters", "--modulus", "12"]);
    let chars = v["characters"].as_array().unwrap();
    assert_eq!(chars.len(), 4);
    for c in chars {
        assert_eq!(c["values"].as_array().unwrap().len(), 12);
        assert!(c["conductor"].as_u64().unwrap() >= 1);
    }
}

#[test]
fn trace_is_exact_on_delta() {
    let v = json(&["trace", "--kappa", "12", "--level", "1", "--m", "2"]);
    assert_eq!(v["exact"]["trace"], "-24");
    assert_eq!(v["estimate"]["envelopes"]["ineffective"], true);
}

#[test]
fn census_dump_is_csv() {
    let out = hecke(&["census", "--q", "5", "--dump"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("q,a,b,t,aut,n1,n2\n"));
    let v = json(&["census", "--q", "13", "--n1", "2"]);
    assert_eq!(v["moment"]["shape"]["n1"], 2);
}

#[test]
fn oracle_and_defaults() {
    let v = json(&["oracle", "--form", "level11", "--op", "eigenvalues", "--limit", "5"]);
    assert_eq!(v["coefficients"][1]["a"], "-2");
    let d = json(&["defaults"]);
    assert!(d["tolerances"]["tsum_per_term"].as_f64().is_some());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(hecke(&["bogus"]).status.code(), Some(2));
    assert_eq!(hecke(&["delta", "--kappa", "3", "--level", "1", "--m", "1", "--n", "1"]).status.code(), Some(2));
    assert_eq!(hecke(&["x0", "--level", "11", "--p", "11"]).status.code(), Some(2));
    assert_eq!(hecke(&["census", "--q", "12"]).status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let a = hecke(&["verify", "census", "--seed", "7"]);
    let b = hecke(&["verify", "census", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn injected_fault_is_caught() {
    let clean = hecke(&["verify", "petersson"]);
    assert_eq!(clean.status.code(), Some(0));
    let out = hecke(&["verify", "petersson", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"r_composition"), "{failed:?}");
}
