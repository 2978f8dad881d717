use std::process::Command;

fn scnet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scnet"))
}

#[test]
fn config_fault_gives_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"network": {"p_rec": 1.5}}"#).unwrap();
    let out = scnet().arg("--config").arg(&cfg).arg("mean-field").output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid_config");
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, r#"{"network": {"p_recc": 0.1}}"#).unwrap();
    let out = scnet().arg("--config").arg(&cfg).arg("mean-field").output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "json");
}

#[test]
fn bad_grid_is_reported() {
    let out = scnet().args(["--grid", "0:10", "single-neuron"]).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid_argument");
}

#[test]
fn single_neuron_rerun_from_manifest_is_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "5", "--duration", "0.3", "--grid", "0:100:50", "single-neuron", "--neurons", "3"];
    let out = scnet().args(args).arg("--out-dir").arg(a.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("single_neuron_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    let cfg = b.path().join("config.json");
    std::fs::write(&cfg, manifest["config"].to_string()).unwrap();
    let out = scnet()
        .arg("--config")
        .arg(&cfg)
        .args(["--duration", "0.3", "--grid", "0:100:50", "single-neuron", "--neurons", "3", "--out-dir"])
        .arg(b.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    for f in manifest["outputs"].as_array().unwrap() {
        let f = f.as_str().unwrap();
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn mean_field_writes_curves_and_fixed_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = scnet().arg("--out-dir").arg(dir.path()).arg("mean-field").output().unwrap();
    assert!(out.status.success());
    let fp: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.path().join("fixed_points_meanfield_standard.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(fp["fixed_points"]["points"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(dir.path().join("meanfield_curves.csv")).unwrap();
    assert!(csv.starts_with("f_in,f_out,variant,g_rec,g_sfa"));
}
