//! End-to-end CLI checks through the compiled binary.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_resolvent-lab"))
}

#[test]
fn classify_ce_morse_emits_certificate_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .args([
            "classify",
            "--model",
            "ce_morse_d3",
            "--no-fomega",
            "--critical-grid",
            "16",
            "--output",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["verdict"], "DoesNotSuppress");
    let certs = json["certificates"].as_array().unwrap();
    assert!(certs.iter().any(|c| {
        (c["u"][0].as_f64().unwrap() - 1.0).abs() < 1e-12
            && (c["r0"].as_f64().unwrap() - 0.25).abs() < 1e-9
            && (c["value"].as_f64().unwrap() - 5.0).abs() < 1e-9
    }));
    assert_eq!(json["critical_points"].as_array().unwrap().len(), 8);
}

#[test]
fn integrate_zero_model_is_exact_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for (out, workers) in [(&out1, "1"), (&out2, "4")] {
        let output = bin()
            .args([
                "integrate",
                "--model",
                "zero",
                "--alpha",
                "0,0,0",
                "--beta",
                "1",
                "--samples",
                "100000",
                "--seed",
                "5",
                "--workers",
                workers,
                "--output",
            ])
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success());
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.contains("I_scr = 1.0000000000e0"), "{stdout}");
    }
    // Byte-identical artifacts for the same seed across worker counts.
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn sweep_writes_csv_with_fit_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let json = dir.path().join("sweep.json");
    let status = bin()
        .args([
            "sweep",
            "--model",
            "nn1",
            "--betas",
            "0.3,0.1,0.03,0.01",
            "--alpha-grid",
            "3",
            "--k0-grid",
            "1",
            "--samples-per-point",
            "40000",
            "--seed",
            "3",
            "--csv",
        ])
        .arg(&csv)
        .arg("--output")
        .arg(&json)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "beta,value,stderr,rho_fit,q_fit");
    assert_eq!(lines.count(), 4);
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(parsed["points"].as_array().unwrap().len(), 4);
    assert!(parsed["rho"].is_number());
}

#[test]
fn trace_writes_constant_level_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let status = bin()
        .args([
            "trace",
            "--model",
            "nn3",
            "--x0",
            "0.25,0,0",
            "--v",
            "0,1,0",
            "--samples",
            "9",
            "--output",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let omega: f64 = row.split(',').next_back().unwrap().parse().unwrap();
        assert!((omega - 1.0).abs() < 1e-8);
    }
    assert!(Path::new(&out.with_extension("json")).exists());
}

#[test]
fn model_file_and_config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("mymodel.txt");
    std::fs::write(&model_path, "dim 2\nconst 2\ncos 1 0 -1\ncos 0 1 -1\n").unwrap();
    let config_path = dir.path().join("defaults.json");
    std::fs::write(&config_path, r#"{"samples": 50000, "seed": 9}"#).unwrap();
    let out = dir.path().join("est.json");
    let status = bin()
        .args(["integrate", "--model"])
        .arg(&model_path)
        .args(["--alpha", "2,2,2", "--beta", "0.5", "--config"])
        .arg(&config_path)
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["estimate"]["samples"], 50000);
    assert_eq!(json["estimate"]["seed"], 9);
}

#[test]
fn validation_errors_exit_two() {
    // Unknown model.
    let status = bin()
        .args([
            "integrate",
            "--model",
            "nope",
            "--alpha",
            "0,0,0",
            "--beta",
            "1",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Unknown config key rejected.
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.json");
    std::fs::write(&config_path, r#"{"samples": 1000, "frobnicate": 3}"#).unwrap();
    let status = bin()
        .args([
            "integrate",
            "--model",
            "zero",
            "--alpha",
            "0,0,0",
            "--beta",
            "1",
            "--config",
        ])
        .arg(&config_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Usage error from the argument parser.
    let status = bin()
        .args(["integrate", "--model", "zero"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // β out of range.
    let status = bin()
        .args([
            "integrate",
            "--model",
            "zero",
            "--alpha",
            "0,0,0",
            "--beta",
            "1.5",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
