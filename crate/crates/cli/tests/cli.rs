use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use aee_core::algebra::rational;
use aee_core::estimators::one_sample_spec;
use aee_core::{ExpansionSet, MomentSet};
use serde_json::Value;
use tempfile::TempDir;

const NORMAL_SPEC: &str = r#"{"n": 10, "mu": [1.0, 0.0, 3.0, 0.0, 15.0, 0.0]}"#;
// centered gamma with shape 3: kappa_j = 3 (j-1)!
const GAMMA_SPEC: &str = r#"{"n": 10, "mu": [3.0, 6.0, 45.0, 168.0, 1410.0, 9240.0]}"#;

fn aee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aee")).args(args).env_remove("AEE_MAX_ORDER").output().expect("spawn aee")
}

fn ok_json(args: &[&str]) -> Value {
    let out = aee(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn lambda_form_text() {
    let out = aee(&["expand", "--test", "one-biased", "--order", "1", "--lambda-form", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("(1/6)*l3*(2*x^2 + 1)"));
}

#[test]
fn r2_of_the_estimators() {
    let doc = ok_json(&["expand", "--test", "one-unbiased", "--order", "0"]);
    assert_eq!(doc["r2"], "(n-1)/n");
    assert_eq!(doc["expansion"]["q"].as_array().map(Vec::len), Some(0));
    let doc = ok_json(&["expand", "--test", "welch-biased", "--order", "2"]);
    assert_eq!(doc["r2"], "1");
    assert_eq!(doc["expansion"]["q"].as_array().map(Vec::len), Some(2));
}

#[test]
fn lambda_form_rejected_for_moderated() {
    let out = aee(&["expand", "--test", "one-moderated", "--order", "2", "--lambda-form"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn order_cap() {
    let out = aee(&["expand", "--test", "one-biased", "--order", "6"]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_aee"))
        .args(["expand", "--test", "one-biased", "--order", "3"])
        .env("AEE_MAX_ORDER", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("AEE_MAX_ORDER"));
}

#[test]
fn config_errors_exit_2() {
    let out = aee(&["eval", "--test", "one-unbiased", "--moments", "/no/such/spec.json", "--x", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/spec.json"));

    let out = aee(&["simulate", "--dist", "normal:0:1", "--test", "one-biased", "--n", "5", "--reps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = aee(&["simulate", "--dist", "gamma:0:1", "--test", "one-biased", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = aee(&["expand", "--test", "three-sample"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "normal.json", NORMAL_SPEC);
    let out = aee(&["diagnose", "--test", "one-unbiased", "--moments", &spec, "--step", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = aee(&["eval", "--test", "welch-biased", "--moments", &spec, "--x", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constant_data_exits_1() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "flat.csv", "value\n2.5\n2.5\n2.5\n2.5\n");
    let out = aee(&["eval", "--test", "one-biased", "--data", &data, "--x", "0"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn normal_spec_is_one_half_at_zero() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "normal.json", NORMAL_SPEC);
    let doc = ok_json(&["eval", "--test", "one-unbiased", "--moments", &spec, "--x", "0"]);
    let terms = doc["rows"][0]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 5);
    for t in terms {
        assert!((t.as_f64().unwrap() - 0.5).abs() < 1e-15);
    }
}

#[test]
fn expand_then_bind_matches_eval() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "gamma.json", GAMMA_SPEC);
    let xs = [-2.5, -1.0, 0.3, 1.7];
    let list = xs.map(|x| x.to_string()).join(",");
    let evaluated = ok_json(&["eval", "--test", "one-unbiased", "--order", "3", "--moments", &spec, "--x", &list]);
    let expanded = ok_json(&["expand", "--test", "one-unbiased", "--order", "3", "--with-k-table"]);

    let es = ExpansionSet::from_json(&expanded["expansion"]).unwrap();
    let ms = MomentSet::declared(10, vec![3.0, 6.0, 45.0, 168.0, 1410.0, 9240.0]).unwrap();
    let kind = "one-unbiased".parse().unwrap();
    let est = one_sample_spec(kind, 10, &rational::from_f64(ms.sigma2()).unwrap(), None).unwrap();
    let bound = es.bind(est.n_f64(), &est.binding(&ms, None, 3).unwrap()).unwrap();
    for (row, &x) in evaluated["rows"].as_array().unwrap().iter().zip(&xs) {
        assert_eq!(row["x"].as_f64(), Some(x));
        for (t, v) in row["terms"].as_array().unwrap().iter().enumerate() {
            let direct = bound.cdf(x, t as u32).unwrap();
            assert!((v.as_f64().unwrap() - direct).abs() < 1e-12, "x={x} t={t}");
        }
    }
}

#[test]
fn data_and_moments_routes_agree() {
    let dir = TempDir::new().unwrap();
    let values = [1.2, -0.4, 3.1, 0.0, 2.2, -1.7, 0.9, 4.4];
    let rows: Vec<String> = values.iter().map(|v| format!("{v},x")).collect();
    let data = write(&dir, "data.csv", &format!("obs,label\n{}\n", rows.join("\n")));
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mu: Vec<f64> = (2..=6).map(|j| values.iter().map(|v| (v - mean).powi(j)).sum::<f64>() / n).collect();
    let spec = write(&dir, "m.json", &serde_json::json!({"n": 8, "mu": mu}).to_string());

    let a = ok_json(&["eval", "--test", "one-biased", "--data", &data, "--col", "obs", "--x", "-1,1", "--order", "3"]);
    let b = ok_json(&["eval", "--test", "one-biased", "--data", &data, "--col", "0", "--x", "-1,1", "--order", "3"]);
    let c = ok_json(&["eval", "--test", "one-biased", "--moments", &spec, "--x", "-1,1", "--order", "3"]);
    assert_eq!(a["rows"], b["rows"]);
    for (ra, rc) in a["rows"].as_array().unwrap().iter().zip(c["rows"].as_array().unwrap()) {
        for (u, v) in ra["terms"].as_array().unwrap().iter().zip(rc["terms"].as_array().unwrap()) {
            assert!((u.as_f64().unwrap() - v.as_f64().unwrap()).abs() < 1e-12);
        }
    }
    let out = aee(&["eval", "--test", "one-biased", "--data", &data, "--x", "0"]);
    assert_eq!(out.status.code(), Some(2), "two columns without --col");
}

#[test]
fn quantiles_of_the_normal_spec() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "normal.json", NORMAL_SPEC);
    let doc = ok_json(&["eval", "--test", "one-unbiased", "--moments", &spec, "--p", "0.025,0.975"]);
    let rows = doc["rows"].as_array().unwrap();
    let lo = rows[0]["value"].as_f64().unwrap();
    let hi = rows[1]["value"].as_f64().unwrap();
    assert!((lo + hi).abs() < 1e-9);
    // Student t with 9 degrees of freedom: 2.262
    assert!((hi - 2.262).abs() < 0.05, "{hi}");
    assert_eq!(rows[0]["side"], "left");
}

#[test]
fn diagnose_usable_orders() {
    let dir = TempDir::new().unwrap();
    let normal = write(&dir, "normal.json", NORMAL_SPEC);
    let doc = ok_json(&["diagnose", "--test", "one-unbiased", "--order", "4", "--moments", &normal]);
    assert_eq!(doc["usable_order"]["left"], 4);
    assert_eq!(doc["usable_order"]["right"], 4);
    let gamma = write(&dir, "gamma.json", GAMMA_SPEC);
    let doc = ok_json(&["diagnose", "--test", "one-biased", "--order", "4", "--moments", &gamma]);
    assert_eq!(doc["usable_order"]["right"], 0);
    assert!(doc["usable_order"]["left"].as_u64().unwrap() >= 2);
}

fn simulate_into(dir: &Path, tag: &str) -> (Vec<u8>, Vec<u8>) {
    let out = dir.join(format!("{tag}.json"));
    let dump = dir.join(format!("{tag}.csv"));
    let status = aee(&[
        "simulate",
        "--dist",
        "gamma:3:1:centered",
        "--test",
        "one-biased",
        "--n",
        "10",
        "--reps",
        "20000",
        "--seed",
        "42",
        "--compare",
        "--order",
        "3",
        "--x=-2,0,2",
        "--output",
        out.to_str().unwrap(),
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    (fs::read(out).unwrap(), fs::read(dump).unwrap())
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let first = simulate_into(dir.path(), "a");
    let second = simulate_into(dir.path(), "b");
    assert_eq!(first, second);
    let doc: Value = serde_json::from_slice(&first.0).unwrap();
    assert_eq!(doc["reps"], 20000);
    let rows = doc["compare"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // at x = -2 the normal approximation misses badly; three terms do far better
    let dev = rows[0]["deviation"].as_array().unwrap();
    assert!(dev[3].as_f64().unwrap().abs() < dev[0].as_f64().unwrap().abs() / 5.0);
    let dump = String::from_utf8(first.1).unwrap();
    assert_eq!(dump.lines().count(), 20001);
}

#[test]
fn two_sample_simulation_needs_both_sizes() {
    let out = aee(&["simulate", "--dist", "normal:0:1", "--test", "welch-biased", "--n", "5", "--reps", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = ok_json(&[
        "simulate",
        "--dist",
        "normal:0:1",
        "--test",
        "welch-biased",
        "--nx",
        "5",
        "--ny",
        "7",
        "--reps",
        "100",
        "--compare",
        "--order",
        "2",
    ]);
    assert_eq!(doc["sizes"], serde_json::json!([5, 7]));
}
