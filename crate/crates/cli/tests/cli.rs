use std::path::Path;
use std::process::{Command, Output};

fn tlsgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlsgate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn preset_toml(name: &str) -> String {
    let out = tlsgate(&["preset", name]);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn table1_csv_with_provenance_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = tlsgate(&["table1", "--out", p.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("param,quantity,value,unit\n"));
    assert!(text.contains("gate=x;sites=0;delta_c=120,epsilon,-6.0000000000000000e1,MHz"));
    let side: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("a.csv.provenance.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(side["provenance"]["experiment"], "table1");
    assert_eq!(side["provenance"]["fock_cutoff"], 10);
    assert!(side["provenance"]["version"]
        .as_str()
        .unwrap()
        .starts_with('v'));
    assert_eq!(side["spec"]["system"]["tls"][0]["g"], 40.0);
}

#[test]
fn json_output_has_spec_provenance_rows() {
    let out = tlsgate(&["swap-point", "--format", "json", "--fock-cutoff", "6"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["spec"]["name"], "swap-point");
    assert_eq!(doc["provenance"]["fock_cutoff"], 6);
    let rows = doc["rows"].as_array().unwrap();
    let eps = rows.iter().find(|r| r["quantity"] == "epsilon").unwrap();
    let v: f64 = eps["value"].as_str().unwrap().parse().unwrap();
    assert!((v - 277.2).abs() < 0.1);
}

#[test]
fn preset_roundtrips_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cz.toml", &preset_toml("cz-plan"));
    let direct = tlsgate(&["cz-plan"]);
    let via = tlsgate(&["cz-plan", "--config", &cfg]);
    assert!(via.status.success());
    assert_eq!(direct.stdout, via.stdout);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        &(preset_toml("table1") + "\nflux_noise = 3\n"),
    );
    let out = tlsgate(&["table1", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flux_noise"));
}

#[test]
fn mismatched_experiment_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", &preset_toml("table1"));
    assert_eq!(
        tlsgate(&["swap-point", "--config", &cfg]).status.code(),
        Some(2)
    );
    assert_eq!(tlsgate(&["custom"]).status.code(), Some(2));
}

#[test]
fn missing_root_is_a_calibration_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = preset_toml("swap-point").replace("drive_limit = 1000.0", "drive_limit = 100.0");
    assert!(text.contains("drive_limit = 100.0"));
    let cfg = write(dir.path(), "s.toml", &text);
    let out = tlsgate(&["swap-point", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unstable_step_is_a_simulation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
name = "custom"

[system]
delta_c = 120.0
epsilon = 0.0
kappa = 0.0
fock_cutoff = 4

[[system.tls]]
delta = 40.0
g = 40.0

[[gates]]
kind = "x"
sites = [0]
"#;
    let cfg = write(dir.path(), "c.toml", text);
    let ok = tlsgate(&["custom", "--config", &cfg]);
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(String::from_utf8_lossy(&ok.stdout).contains("compensated_fidelity"));
    let out = tlsgate(&["custom", "--config", &cfg, "--step-ps", "2000"]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn forcing_transformed_frame_on_cz_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = preset_toml("cz-plan").replace("name = \"cz-plan\"", "name = \"custom\"");
    let cfg = write(dir.path(), "cz.toml", &text);
    let out = tlsgate(&["custom", "--config", &cfg, "--frame", "transformed"]);
    assert_eq!(out.status.code(), Some(2));
}
