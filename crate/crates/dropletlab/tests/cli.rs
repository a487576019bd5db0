use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dropletlab"));
    c.env_remove("DROPLETLAB_TOL");
    c
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = bin().args(args).output().unwrap();
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc)
}

#[test]
fn constants_document() {
    let (code, doc) = run(&["constants", "--d", "3", "--s", "2"]);
    assert_eq!(code, 0);
    let r = &doc["results"];
    assert!((r["omega_d"].as_f64().unwrap() - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    // γ(3,2) = 4π² for the unit ball
    assert!(
        (r["gamma_ds"].as_f64().unwrap() / (4.0 * std::f64::consts::PI.powi(2)) - 1.0).abs() < 1e-8
    );
    assert!(r["C1"].is_number() && r["C2"].is_number());
    assert_eq!(doc["spec"]["command"], "constants");
    assert_eq!(doc["errors"], Value::Array(vec![]));
}

#[test]
fn optimize_two_body() {
    let (code, doc) = run(&[
        "optimize", "--d", "3", "--s", "2", "--p", "1", "--masses", "1,1", "--seed", "7",
    ]);
    assert_eq!(code, 0);
    let r = &doc["results"];
    assert!((r["norms"][0].as_f64().unwrap() - 4.0).abs() < 1e-4);
    assert!((r["result"]["value"].as_f64().unwrap() + 0.125).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    let (code, doc) = run(&["energy", "--s", "2", "--p", "2.5"]);
    assert_eq!(code, 2);
    assert!(doc["errors"][0]["message"]
        .as_str()
        .unwrap()
        .contains("p < s"));
    assert_eq!(doc["results"], Value::Null);
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    std::fs::write(
        &cfg,
        r#"{"command":"energy","Z":1.0,"masses":[1,1],"points":[[0.2,0,0]]}"#,
    )
    .unwrap();
    let (code, doc) = run(&["energy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(doc["errors"][0]["kind"], "computation");
    let (code, _) = run(&["threshold", "--config", "/nonexistent/spec.json"]);
    assert_eq!(code, 2);
}

#[test]
fn tolerance_precedence() {
    let tol = |env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.arg("constants");
        if let Some(e) = env {
            c.env("DROPLETLAB_TOL", e);
        }
        if let Some(f) = flag {
            c.args(["--tol", f]);
        }
        let doc: Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        doc["results"]["tolerance"].as_f64().unwrap()
    };
    assert_eq!(tol(None, None), 1e-8);
    assert_eq!(tol(Some("1e-6"), None), 1e-6);
    assert_eq!(tol(Some("1e-6"), Some("1e-7")), 1e-7);
}

#[test]
fn sweep_writes_csv_beside_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let status = bin()
        .args([
            "expansion",
            "--zgrid",
            "1e-2,1e-3",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("Z,exact,predicted,residual"));
    assert_eq!(lines.count(), 2);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["spec"]["zgrid"], serde_json::json!([0.01, 0.001]));
    assert_eq!(doc["results"]["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    std::fs::write(&cfg, r#"{"command":"partition","M":3.0,"Nmax":2,"seed":5}"#).unwrap();
    let a = bin()
        .args(["partition", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    let b = bin()
        .args(["partition", "--M", "3", "--Nmax", "2", "--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}
