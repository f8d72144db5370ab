use std::path::Path;
use std::process::{Command, Output};

fn zetalab(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zetalab"))
        .args(args)
        .env("ZETALAB_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).expect("valid json")
}

#[test]
fn zero_table_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zeros.txt");
    let o = zetalab(
        &["zeros", "compute", "--t-max", "100", "--err", "1e-8", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let data: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(data.len(), 29);
    assert!((data[0] - 14.134_725_141_734_693).abs() < 1e-8);
    assert!(text.lines().any(|l| l.starts_with("# zeros: ")));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn ng_constant_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&zetalab(&["const", "ng-b", "--p-max", "10000", "--format", "json"], dir.path()));
    let b = v["result"]["value"].as_f64().unwrap();
    assert!((b - 0.26739).abs() < 5e-5, "{v}");
    assert!(v["meta"]["version"].is_string());
}

#[test]
fn brute_force_smallest_pair() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = dir.path().join("z.txt");
    zetalab(&["zeros", "compute", "--t-max", "100", "--out", zeros.to_str().unwrap()], dir.path());
    let v = json(&zetalab(
        &["eli", "brute", "--zeros", zeros.to_str().unwrap(), "--m", "2", "--L", "1", "--format", "json"],
        dir.path(),
    ));
    let value = v["result"]["value"].as_f64().unwrap();
    assert!((value - 6.887_314_5).abs() < 1e-6, "{v}");
}

#[test]
fn reruns_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["model", "sample", "--seed", "7", "--kind", "pnt-sine", "--T", "30", "--samples", "2000", "--no-timestamp"];
    let a = stdout(&zetalab(&args, dir.path()));
    let b = stdout(&zetalab(&args, dir.path()));
    assert_eq!(a, b);
    assert!(!a.contains("generated:"));
    assert!(a.contains("# seed: 7"));
    let c = stdout(&zetalab(&args[..args.len() - 1], dir.path()));
    assert!(c.contains("generated:"));
}

#[test]
fn csv_and_json_carry_same_rows() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sieve", "psi", "--x-min", "100", "--x-max", "1000", "--n", "5", "--no-timestamp"];
    let csv = stdout(&zetalab(&base, dir.path()));
    let mut with_json = base.to_vec();
    with_json.extend(["--format", "json"]);
    let v = json(&zetalab(&with_json, dir.path()));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    let jrows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(jrows.len(), 5);
    assert!(csv.lines().any(|l| l.starts_with("# command: ")));
    let first_x: f64 = rows[0].split(',').next().unwrap().parse().unwrap();
    assert_eq!(first_x, 100.0);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = zetalab(&["sieve", "psi", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_one_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.txt");
    let o = zetalab(&["zeros", "load", "--zeros", missing.to_str().unwrap(), "--t-max", "50"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).expect("json on stderr");
    assert!(err["error"].is_string());
    assert!(err["message"].is_string());
}
