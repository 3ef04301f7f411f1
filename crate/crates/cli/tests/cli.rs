use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qthermo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qthermo"))
        .args(args)
        .env_remove("QTHERMO_TOL_SCALE")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", r#"{"kind":"spontaneous_emission","t_max":1}"#);
    let out = dir.path().join("out");
    let status = qthermo(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));

    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,U,S,W_d,W_c,Q_d,Q_c,W,Q,Q_ref16,W_ref16,res_power,res_heat,res_first_law"
    );
    assert_eq!(lines.count(), 1001);
    assert!(!csv.contains('\r'));

    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["audit"]["passed"], Value::Bool(true));
    assert_eq!(manifest["config"]["Ee"], serde_json::json!(1.0));
    assert_eq!(manifest["grid"]["count"], serde_json::json!(1001));
    assert_eq!(manifest["outputs"]["series"], "series.csv");
    let audit = read_json(&out.join("audit.json"));
    assert_eq!(audit["passed"], Value::Bool(true));
}

#[test]
fn spin_manifest_reports_rabi_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "spin.json",
        r#"{"kind":"spin_precession","alpha":1.5707963,"omega0":1,"omega":1,"t_max":1}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        qthermo(&["run", "--config", &config, "--out", out.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let omega = read_json(&out.join("manifest.json"))["derived"]["Omega"]
        .as_f64()
        .unwrap();
    assert!((omega - std::f64::consts::SQRT_2).abs() < 1e-6);

    let audit = read_json(&out.join("audit.json"));
    let entries = audit["identities"].as_array().unwrap();
    for name in ["appendix_b_Pk_dot", "appendix_b_Qc"] {
        let e = entries.iter().find(|e| e["name"] == name).unwrap();
        assert!(e["max_residual"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn sweep_creates_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", r#"{"kind":"spontaneous_emission","dt":0.002}"#);
    let out = dir.path().join("sweep");
    let status = qthermo(&[
        "sweep",
        "--config",
        &config,
        "--vary",
        "gamma=0.5,1,2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    let summary = read_json(&out.join("sweep.json"));
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    let mut hashes = Vec::new();
    for (run, value) in runs.iter().zip(["0.5", "1", "2"]) {
        let run_dir = out.join(format!("gamma={value}"));
        let manifest = read_json(&run_dir.join("manifest.json"));
        assert_eq!(manifest["config_hash"], run["config_hash"]);
        assert_eq!(manifest["config"]["gamma"].as_f64().unwrap(), value.parse::<f64>().unwrap());
        hashes.push(manifest["config_hash"].as_str().unwrap().to_owned());
    }
    hashes.sort();
    hashes.dedup();
    assert_eq!(hashes.len(), 3);
}

#[test]
fn invalid_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for text in [
        r#"{"kind":"spontaneous_emission","gamma":-1}"#,
        r#"{"kind":"spin_precession","colour":"red"}"#,
        "{ not json",
    ] {
        let config = write_config(dir.path(), "bad.json", text);
        let result = qthermo(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
        assert_eq!(result.status.code(), Some(2), "{text}");
        assert!(!out.join("manifest.json").exists());
    }
    let config = write_config(dir.path(), "bad.json", r#"{"kind":"spontaneous_emission","gamma":-1}"#);
    let stderr = String::from_utf8(
        qthermo(&["run", "--config", &config, "--out", out.to_str().unwrap()]).stderr,
    )
    .unwrap();
    assert!(stderr.contains("gamma") && stderr.contains("must be > 0"), "{stderr}");
}

#[test]
fn bad_tolerance_scale_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", r#"{"kind":"spontaneous_emission","t_max":0.1}"#);
    let out = dir.path().join("out");
    let result = Command::new(env!("CARGO_BIN_EXE_qthermo"))
        .args(["run", "--config", &config, "--out", out.to_str().unwrap()])
        .env("QTHERMO_TOL_SCALE", "abc")
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn audit_rejects_series_from_other_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.json", r#"{"kind":"spontaneous_emission","t_max":0.5}"#);
    let b = write_config(dir.path(), "b.json", r#"{"kind":"spontaneous_emission","t_max":0.5,"gamma":2}"#);
    let out = dir.path().join("out");
    assert_eq!(qthermo(&["run", "--config", &a, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let series = out.join("series.csv");
    let series = series.to_str().unwrap();
    let ok = qthermo(&["audit", "--series", series, "--config", &a]);
    assert_eq!(ok.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(qthermo(&["audit", "--series", series, "--config", &b]).status.code(), Some(1));
}

#[test]
fn shipped_configs_pass_their_audits() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    for name in ["spin_default.json", "emission_default.json"] {
        let out = dir.path().join(name);
        let config = configs.join(name);
        let result = qthermo(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(result.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&result.stderr));
    }
}
