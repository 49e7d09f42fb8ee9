use std::path::Path;
use std::process::{Command, Output};

fn pathlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn malformed_interval_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"time": {"t_start": 1.0, "t_end": 0.5, "n_slices": 4}}"#);
    let out = dir.path().join("out");
    let o = pathlab(&["--config", &cfg, "kernel"], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-positive interval"));
    assert!(!out.exists());
}

#[test]
fn focal_point_exits_with_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"potential": {"kind": "harmonic", "omega": 3.141592653589793},
            "space": {"x_min": -2.0, "x_max": 2.0, "n_points": 41}}"#,
    );
    let out = dir.path().join("out");
    let o = pathlab(&["--config", &cfg, "kernel"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("focal point"));
    assert!(!out.exists());
}

#[test]
fn missing_config_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = pathlab(&["--config", "/nonexistent/config.json", "transition"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_key_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_slicez": 4}"#);
    let o = pathlab(&["--config", &cfg, "transition"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn truncation_policy_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"endpoints": {"x1": -7.0, "x2": 1.0}}"#);
    let out = dir.path().join("out");
    let o = pathlab(&["--config", &cfg, "theorem-check"], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("edge leak"));
    assert!(!out.exists());
}

#[test]
fn theorem_check_defaults_succeed_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = pathlab(&["--seed", "3", "theorem-check"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("theorem_table.csv")).unwrap();
    assert!(table.contains("# config_sha256: "));
    assert!(table.contains("# seed: 3"));
    assert!(table.contains("# n_slices: 8"));
    let header_row = table.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header_row.starts_with("k,tau,x_m,ratio_x_re"));
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 8);
    assert!(out.join("theorem.gp").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("theorem_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["report"]["quadratic_assertion"], serde_json::Value::Bool(true));
}

#[test]
fn failing_assertion_still_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"tolerances": {"quadratic": 1e-12}}"#);
    let out = dir.path().join("out");
    let o = pathlab(&["--config", &cfg, "theorem-check"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(out.join("theorem_summary.json").exists());
}

#[test]
fn variational_check_flags_saddle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"potential": {"kind": "harmonic", "omega": 1.0},
            "time": {"t_start": 0.0, "t_end": 3.5, "n_slices": 32},
            "probe": {"magnitude": 0.05, "trials": 500}}"#,
    );
    let out = dir.path().join("out");
    let o = pathlab(&["--config", &cfg, "variational-check"], &out);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("stationary but not minimal"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("variational_summary.json")).unwrap()).unwrap();
    assert!(summary["report"]["probe_fraction"].as_f64().unwrap() < 1.0);
}

#[test]
fn example_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        pathlab::experiments::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n > 0);
}
