use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cfg(rel: &str) -> String {
    configs().join(rel).display().to_string()
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler-ricci")).args(args).output().expect("binary runs")
}

fn run_to(args: &[&str], out: &Path) -> (i32, Value) {
    let mut all: Vec<&str> = args.to_vec();
    let out_s = out.display().to_string();
    all.extend(["--out", &out_s]);
    let o = run(&all);
    let code = o.status.code().unwrap();
    let text = std::fs::read_to_string(out).unwrap_or_else(|_| panic!("no report; stderr: {}", String::from_utf8_lossy(&o.stderr)));
    (code, serde_json::from_str(&text).expect("valid json"))
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn column<'a>(report: &'a Value, name: &str) -> Vec<&'a Value> {
    report["rows"].as_array().unwrap().iter().map(|r| &r[name]).collect()
}

#[test]
fn curvature_of_flat_plane_has_zero_ricci() {
    let (code, rep) = run_to(&["curvature", "--metric", &cfg("metrics/euclidean.toml"), "--grid", "default"], &tmp("g.json"));
    assert_eq!(code, 0);
    let ric = column(&rep, "Ric");
    assert_eq!(ric.len(), 72);
    assert!(ric.iter().all(|v| num(v) == 0.0));
    assert!(column(&rep, "gamma111").iter().all(|v| num(v) == 0.0));
}

#[test]
fn curvature_of_sphere_has_unit_ricci() {
    let (code, rep) = run_to(&["curvature", "--metric", &cfg("metrics/sphere.toml")], &tmp("sphere.json"));
    assert_eq!(code, 0);
    for v in column(&rep, "Ric") {
        assert!((num(v) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn gaussian_soliton_check_passes() {
    let (code, rep) = run_to(
        &[
            "soliton-check",
            "--metric",
            &cfg("metrics/euclidean.toml"),
            "--field",
            &cfg("fields/gaussian_v.toml"),
            "--lambda",
            "0.5",
        ],
        &tmp("rep.json"),
    );
    assert_eq!(code, 0);
    assert!(num(&rep["summary"]["max"]) < 1e-10);
    assert!(num(&rep["summary"]["tensor_max"]) < 1e-10);
}

#[test]
fn wrong_lambda_fails_soliton_check() {
    let (code, rep) = run_to(
        &["soliton-check", "--case", &cfg("cases/gaussian_soliton.toml"), "--lambda", "0.4"],
        &tmp("wrong.json"),
    );
    assert_eq!(code, 1);
    assert_eq!(rep["summary"]["pass"], Value::Bool(false));
}

#[test]
fn sphere_flow_verifies() {
    let (code, rep) = run_to(
        &["flow-verify", "--case", &cfg("cases/sphere_soliton.toml"), "--tmax", "0.4", "--dt", "1e-4"],
        &tmp("flow.json"),
    );
    assert_eq!(code, 0);
    assert!(num(&rep["summary"]["max"]) < 1e-4);
    assert_eq!(num(&rep["summary"]["critical_time"]), 0.5);
}

#[test]
fn flow_past_critical_time_is_a_domain_error() {
    let o = run(&["flow-verify", "--case", &cfg("cases/sphere_soliton.toml"), "--tmax", "0.6"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("0.5"), "{err}");
}

#[test]
fn conformal_flow_of_sphere_and_rejection_of_randers() {
    let (code, rep) = run_to(&["flow-conformal", "--metric", &cfg("metrics/sphere.toml")], &tmp("conf.json"));
    assert_eq!(code, 0);
    assert!(num(&rep["summary"]["max_error"]) < 1e-5);
    let o = run(&["flow-conformal", "--metric", &cfg("metrics/randers01.toml")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not Einstein"));
}

#[test]
fn check_finsler_locates_convexity_failure() {
    let (code, rep) = run_to(&["check-finsler", "--metric", &cfg("metrics/randers15.toml")], &tmp("cf.json"));
    assert_eq!(code, 1);
    assert!(rep["summary"]["first_failure"].is_string());
    assert!(column(&rep, "min_eigenvalue").iter().any(|v| num(v) < 0.0));
    let (code, _) = run_to(&["check-finsler", "--metric", &cfg("metrics/randers01.toml")], &tmp("cf_ok.json"));
    assert_eq!(code, 0);
}

#[test]
fn estimate_recovers_sphere_constant() {
    let (code, rep) = run_to(&["estimate", "--metric", &cfg("metrics/sphere.toml")], &tmp("est.json"));
    assert_eq!(code, 0);
    assert!((num(&rep["summary"]["lambda"]) - 1.0).abs() < 1e-5);
    assert_eq!(rep["summary"]["lambda_sign"], "positive");
}

#[test]
fn estimate_with_basis() {
    let (code, rep) = run_to(
        &["estimate", "--metric", &cfg("metrics/euclidean.toml"), "--basis", &cfg("fields/radial.toml"), "--lambda", "0.5"],
        &tmp("est_basis.json"),
    );
    assert_eq!(code, 0);
    assert!((num(&rep["summary"]["c1"]) - 0.5).abs() < 1e-10);
    // jointly, the radial field on flat space cannot separate c from lambda
    let o = run(&["estimate", "--metric", &cfg("metrics/euclidean.toml"), "--basis", &cfg("fields/radial.toml")]);
    assert_eq!(o.status.code(), Some(3));
    let (code, rep) = run_to(
        &["estimate", "--metric", &cfg("metrics/sphere.toml"), "--basis", &cfg("fields/rotation.toml")],
        &tmp("est_rot.json"),
    );
    assert_eq!(code, 0);
    assert_eq!(rep["summary"]["null_directions"], 1);
}

#[test]
fn flow_build_gaussian_is_stationary() {
    let (code, rep) = run_to(&["flow-build", "--case", &cfg("cases/gaussian_soliton.toml")], &tmp("fb.json"));
    assert_eq!(code, 0);
    for r in rep["rows"].as_array().unwrap() {
        assert!((num(&r["ratio"]) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn verify_lemmas_single_metric() {
    let (code, rep) = run_to(
        &[
            "verify-lemmas",
            "--suite",
            "lemmas",
            "--metric",
            &cfg("metrics/sphere.toml"),
            "--diffeo",
            &cfg("diffeos/polynomial.toml"),
            "--mu",
            "2",
            "--grid",
            "-0.5,0.5,2,4",
        ],
        &tmp("vl.json"),
    );
    assert_eq!(code, 0);
    assert_eq!(rep["summary"]["failed"], 0);
    assert!(rep["summary"]["checks"].as_u64().unwrap() > 0);
}

#[test]
fn json_and_csv_agree() {
    let args = ["soliton-check", "--case", &cfg("cases/sphere_rotation.toml")];
    let (_, json) = run_to(&args, &tmp("agree.json"));
    let csv_path = tmp("agree.csv");
    let mut all = args.to_vec();
    let p = csv_path.display().to_string();
    all.extend(["--out", &p, "--format", "csv"]);
    assert_eq!(run(&all).status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let cols: Vec<String> = json["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
    assert_eq!(header, cols);
    let rows = json["rows"].as_array().unwrap();
    let mut n = 0;
    for (rec, row) in rdr.records().zip(rows) {
        let rec = rec.unwrap();
        for (field, name) in rec.iter().zip(&cols) {
            let j = &row[name.as_str()];
            match j {
                Value::Number(_) => assert_eq!(field.parse::<f64>().unwrap(), num(j), "{name}"),
                Value::Null => assert!(field.is_empty()),
                other => assert_eq!(field, other.to_string().trim_matches('"')),
            }
        }
        n += 1;
    }
    assert_eq!(n, rows.len());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["flow-verify", "--case", &cfg("cases/gaussian_soliton.toml")];
    let a = tmp("det_a.json");
    let b = tmp("det_b.json");
    run_to(&args, &a);
    run_to(&args, &b);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(run(&["curvature"]).status.code(), Some(2));
    assert_eq!(run(&["curvature", "--metric", "missing.toml"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let o = run(&["curvature", "--metric", &cfg("metrics/euclidean.toml"), "--grid", "1,0,3,8"]);
    assert_eq!(o.status.code(), Some(2));
    let bad = tmp("bad_metric.toml");
    std::fs::write(&bad, "dim = 2\nF2 = \"y1^2 + \"\n").unwrap();
    let o = run(&["curvature", "--metric", &bad.display().to_string()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad_metric.toml"));
    std::fs::write(&bad, "dim = 2\nF2 = \"y1^2\"\ncolour = 1\n").unwrap();
    assert_eq!(run(&["curvature", "--metric", &bad.display().to_string()]).status.code(), Some(2));
    let o = run(&["soliton-check", "--case", &cfg("cases/static.toml"), "--tol", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_metric_is_a_numeric_error() {
    let bad = tmp("degenerate.toml");
    std::fs::write(&bad, "dim = 2\nF2 = \"y1^2\"\n").unwrap();
    let o = run(&["curvature", "--metric", &bad.display().to_string()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at sample"));
}

#[test]
fn summary_goes_to_stdout_with_out_and_stderr_without() {
    let out = tmp("where.json");
    let o = run(&["curvature", "--metric", &cfg("metrics/euclidean.toml"), "--out", &out.display().to_string()]);
    assert!(String::from_utf8_lossy(&o.stdout).ends_with("PASS\n"));
    let o = run(&["curvature", "--metric", &cfg("metrics/euclidean.toml")]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(serde_json::from_str::<Value>(&stdout).is_ok());
    assert!(String::from_utf8_lossy(&o.stderr).ends_with("PASS\n"));
}
