use std::process::{Command, Output};

use serde_json::Value;

fn fbcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = fbcap(&all);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn csv_rows(stdout: &[u8]) -> Vec<Vec<String>> {
    String::from_utf8_lossy(stdout)
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn white_capacity_in_bits() {
    let v = json(&[
        "capacity", "--model", "ma1", "--alpha", "0", "--snr", "3", "--units", "bits",
    ]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["units"], "bits");
    let rate = v["data"][0]["rate_bits"].as_f64().unwrap();
    assert!((rate - 1.0).abs() < 1e-12, "{rate}");
}

#[test]
fn fixed_point_verification_agrees() {
    let v = json(&[
        "capacity",
        "--model",
        "ma1",
        "--alpha",
        "0.5",
        "--snr",
        "1",
        "--verify",
        "fixed-point",
    ]);
    let row = &v["data"][0];
    let a = row["rate_nats"].as_f64().unwrap();
    let b = row["fixed_point_nats"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-10);
}

#[test]
fn arma_with_zero_beta_matches_ma1() {
    let arma = json(&[
        "capacity", "--model", "arma11", "--alpha", "0.5", "--beta", "0",
    ]);
    let ma = json(&["capacity", "--model", "ma1", "--alpha", "0.5"]);
    assert_eq!(arma["data"][0]["rate_nats"], ma["data"][0]["rate_nats"]);
}

#[test]
fn sweeps_cover_the_grid_with_unit_headers() {
    let out = fbcap(&[
        "capacity",
        "--alpha",
        "-0.3,0,0.5",
        "--snr",
        "1,4",
        "--format",
        "csv",
        "--units",
        "bits",
    ]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    assert!(rows[0].contains(&"rate_bits".to_string()));
    assert_eq!(rows.len(), 1 + 6);
}

#[test]
fn table_header_states_units() {
    let out = fbcap(&["recursion", "--n", "10", "--units", "bits"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("# recursion (rates in bits)"), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(fbcap(&["capacity", "--alpha", "2"]).status.code(), Some(2));
    assert_eq!(fbcap(&["capacity", "--snr", "0"]).status.code(), Some(2));
    assert_eq!(fbcap(&["capacity", "--nonsense"]).status.code(), Some(2));
    assert_eq!(
        fbcap(&["simulate", "--trials", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(
        fbcap(&["capacity", "--model", "white", "--verify", "fixed-point"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(fbcap(&["--help"]).status.code(), Some(0));
}

#[test]
fn recursion_approaches_the_fixed_point() {
    let v = json(&["recursion", "--alpha", "0.7", "--snr", "1", "--n", "10000"]);
    let gap = v["data"][0]["gap_nats"].as_f64().unwrap();
    assert!(gap.abs() <= 1e-3);
}

#[test]
fn oracle_methods_agree() {
    let v = json(&["oracle", "--alpha", "0.7", "--snr", "1", "--n", "3,5"]);
    for row in v["data"].as_array().unwrap() {
        assert!(row["greedy_generic_gap_nats"].as_f64().unwrap() <= 1e-5);
        assert!(
            row["generic_stationary_nats"].as_f64().unwrap()
                <= row["generic_modified_nats"].as_f64().unwrap() + 1e-5
        );
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "simulate", "--n", "10,12", "--trials", "2000", "--seed", "7", "--format", "csv",
    ];
    let a = fbcap(&args);
    let b = fbcap(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = fbcap(&[
        "simulate", "--n", "10,12", "--trials", "2000", "--seed", "8", "--format", "csv",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_json_carries_full_reports() {
    let v = json(&["simulate", "--n", "10", "--trials", "1000"]);
    assert_eq!(v["kind"], "simulate");
    let report = &v["data"]["reports"][0];
    assert_eq!(report["mse_analytic"].as_array().unwrap().len(), 10);
    assert_eq!(v["data"]["rows"][0]["trials"], 1000);
}

#[test]
fn spectrum_matches_theory() {
    let v = json(&["spectrum"]);
    let err = v["data"]["reports"]["max_relative_error"].as_f64().unwrap();
    assert!(err <= 0.05, "{err}");
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("recipe.cfg");
    std::fs::write(&cfg, "# recipe\nalpha = 0.5\nsnr = 2\nunits = bits\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = json(&["capacity", "--config", cfg]);
    assert_eq!(v["units"], "bits");
    assert_eq!(v["data"][0]["snr"], 2.0);
    assert_eq!(v["data"][0]["alpha"], 0.5);

    let v = json(&["capacity", "--config", cfg, "--snr", "1", "--units", "nats"]);
    assert_eq!(v["units"], "nats");
    assert_eq!(v["data"][0]["snr"], 1.0);

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "trials = 5\n").unwrap();
    let out = fbcap(&["capacity", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cap.csv");
    let out = fbcap(&[
        "capacity",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("model,alpha,beta,snr,rate_nats"));
}

#[test]
fn report_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbcap(&[
        "report",
        "--output",
        dir.path().to_str().unwrap(),
        "--trials",
        "2000",
        "--format",
        "csv",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "capacity_vs_snr.csv",
        "convergence.csv",
        "oracle.csv",
        "simulation.csv",
        "mse_n25.csv",
        "spectrum.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let summary = csv_rows(&out.stdout);
    assert!(summary[1..].iter().all(|r| r[1] == "ok"));

    let failing = tempfile::tempdir().unwrap();
    let out = fbcap(&[
        "report",
        "--output",
        failing.path().to_str().unwrap(),
        "--trials",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(failing.path().join("oracle.csv").exists());
}
