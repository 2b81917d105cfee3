use std::process::Command;

fn sixquanta() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sixquanta"))
}

#[test]
fn calibrate_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = sixquanta()
        .args(["calibrate", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("calibrate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("calibrate.meta.json").exists());
}

#[test]
fn effective_prints_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = sixquanta()
        .args(["effective", "--threads", "1", "--seed", "7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = report["g4ph"].as_f64().unwrap();
    assert!((g - 0.337).abs() < 0.01);
    assert!(dir.path().join("effective.json").exists());
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"pumps": {"Delta": 5.1}, "extra": 1}"#).unwrap();
    let out = sixquanta()
        .arg("--config")
        .arg(&path)
        .arg("rates")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let missing = sixquanta()
        .args(["--config", "/nonexistent.json", "rates"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("resonant.json");
    // Delta chosen so chi_bb - 4 chi_ab + Delta = 0
    std::fs::write(
        &path,
        r#"{"pumps": {"Delta": -93.0, "g1": 0.5, "g2": 0.5}}"#,
    )
    .unwrap();
    let out = sixquanta()
        .arg("--config")
        .arg(&path)
        .arg("effective")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
