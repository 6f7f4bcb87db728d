use std::fs;
use std::process::Command;

fn qsse() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsse"))
}

#[test]
fn preset_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n3");
    let status = qsse()
        .args([
            "--preset",
            "n3",
            "--iterations",
            "3000",
            "--burn-in",
            "500",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next(),
        Some("iter,n,move,accepted,running_n_mean,running_energy")
    );
    assert_eq!(lines.count(), 3000);
    assert!(!trace.contains('\r'));
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    for key in [
        "seed = 5",
        "iterations = 3000",
        "burn_in = 500",
        "ae_m = 29",
        "weight_mode = \"exact\"",
    ] {
        assert!(manifest.contains(key), "{key} missing from manifest");
    }
}

#[test]
fn iteration_count_below_burn_in_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsse()
        .args(["--preset", "n3", "--iterations", "300", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("burn_in"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "n_sites = 2\nperiodic = false\nbeta = 1.0\niterations = 500\nburn_in = 50\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = qsse()
        .arg("--config")
        .arg(&cfg)
        .args(["--weight-mode", "bernoulli", "--shots", "64", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("weight_mode = \"bernoulli\""));
    assert!(manifest.contains("shots = 64"));
    assert!(fs::read_to_string(out.join("results.json"))
        .unwrap()
        .contains("\"energy\""));
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "n_sites = 3\nbeta = \"warm\"\n").unwrap();
    let out = qsse().arg("--config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("beta"), "{err}");
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = qsse()
            .args([
                "--preset",
                "n4",
                "--iterations",
                "12000",
                "--weight-mode",
                "ae",
                "--ae-t",
                "8",
                "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out.join("trace.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn scaling_table() {
    let out = qsse()
        .args(["--scaling-sites", "3,4", "--scaling-orders", "0,2,4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("n_sites,n,gate_count,simulator_seconds"));
    assert!(text.contains("affine in n: true"));
}

#[test]
fn verify_report_is_json() {
    let out = qsse().args(["--verify"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"passed\": true"));
    assert!(text.contains("general_min_real_weight"));
    assert!(text.contains("amplitude_oracle_max_deviation"));
}
