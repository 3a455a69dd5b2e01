use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multibump")).args(args).output().expect("binary runs")
}

fn write(dir: &std::path::Path, text: &str) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn constants_report_on_stdout() {
    let out = bin(&["constants", "--dim", "6", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "pass");
    assert_eq!(v["config"]["dim"], 6);
    assert!(v.get("generated_at_unix").is_none());
}

#[test]
fn timestamp_is_added_by_default() {
    let out = bin(&["critical-point"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["generated_at_unix"].as_u64().unwrap() > 0);
}

#[test]
fn report_keys_are_sorted() {
    let out = bin(&["critical-point", "--no-timestamp"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn artifacts_are_written_to_the_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = bin(&["critical-point", "--n", "12", "--out", out_dir.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("critical-point.csv")).unwrap();
    assert!(csv.starts_with("n,t_star,lambda_star,lambda_closed_form,classification\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 2);
    assert!(out_dir.join("critical-point.json").exists());
}

#[test]
fn missing_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), r#"{"potential": {"form": "quadratic-bump", "c0": 1.0}}"#);
    let out = bin(&["balance", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("potential") && err.contains("r0"), "{err}");
}

#[test]
fn unknown_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), r#"{"geometry": {"k": [8], "sides": 3}}"#);
    let out = bin(&["balance", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometry"));
}

#[test]
fn failed_check_exits_with_one() {
    let out = bin(&["pohozaev", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "fail");
}

#[test]
fn reruns_are_byte_identical() {
    let a = bin(&["balance", "--k", "8,16,32", "--seed", "3", "--no-timestamp"]);
    let b = bin(&["balance", "--k", "8,16,32", "--seed", "3", "--no-timestamp"]);
    assert_eq!(a.stdout, b.stdout);
}
