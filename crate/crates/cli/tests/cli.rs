mod common;

use std::f64::consts::PI;
use std::fs;
use std::process::Command as Process;

use common::{config, config_path, REGRESSION};
use jacobi_cli::{run, run_to_dir, CliError, Command, EXIT_NUMERICAL, EXIT_VALIDATION};
use serde_json::Value;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_jacobi"))
}

#[test]
fn every_regression_config_validates() {
    for (command, name) in REGRESSION {
        assert!(config(name).validate(*command).is_empty(), "{command} {name}");
    }
}

#[test]
fn serial_and_parallel_runs_agree() {
    for (command, name) in [(Command::Curvature, "pendulum"), (Command::Hyperbolic, "inverted"), (Command::Lderiv, "lderiv")] {
        let cfg = config(name);
        let a = run(&cfg, command, false).unwrap();
        let b = run(&cfg, command, true).unwrap();
        assert_eq!(a.series.to_csv(), b.series.to_csv(), "{command}");
        assert_eq!(a.to_json("h"), b.to_json("h"), "{command}");
    }
}

#[test]
fn curvature_of_oscillator_is_one_at_start() {
    let r = run(&config("oscillator"), Command::Curvature, false).unwrap();
    assert_eq!(r.scalars["eigenvalues_t0"], serde_json::json!([1.0]));
    let j = r.scalars["jacobi_eigenvalues_t0"][0].as_f64().unwrap();
    assert!((j - 1.0).abs() < 1e-5, "{j}");
    assert_eq!(r.series.columns, vec!["t", "R[0][0]", "eig[0]", "jacobi_eig[0]"]);
}

#[test]
fn conjugate_times_of_oscillator() {
    let r = run(&config("oscillator"), Command::Conjugate, false).unwrap();
    let times: Vec<f64> = r.series.rows.iter().map(|row| row[0]).collect();
    assert_eq!(times.len(), 3);
    for (k, t) in times.iter().enumerate() {
        assert!((t - (k + 1) as f64 * PI).abs() <= 2e-3, "{t}");
    }
}

#[test]
fn morse_index_of_free_particle_is_zero() {
    let r = run(&config("free_particle"), Command::Morse, false).unwrap();
    assert_eq!(r.scalars["index"], 0);
    let r = run(&config("morse_oscillator"), Command::Morse, false).unwrap();
    assert_eq!(r.scalars["index"], 2);
    assert_eq!(r.scalars["agrees"], true);
}

#[test]
fn explicit_family_crosses_once() {
    let r = run(&config("lderiv_explicit"), Command::Lderiv, false).unwrap();
    assert_eq!(r.scalars["family_hessian_delta"], -1);
    assert_eq!(r.scalars["family_agrees"], true);
    assert_eq!(r.scalars["index_split_holds"], true);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config_path("oscillator")).unwrap().replace("step = 0.001", "step = 0.0");
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, text).unwrap();
    let out = dir.path().join("out");
    let o = bin().args(["flow", "--config"]).arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_VALIDATION));
    let record: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(record["error"], "Validation");
    assert!(record["messages"].as_array().unwrap().iter().any(|m| m == "step must be positive"));
    assert!(!out.exists());

    let o = bin().args(["reduce", "--config"]).arg(config_path("oscillator")).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_VALIDATION));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trivial"));

    let o = bin().args(["flow", "--config", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_VALIDATION));
}

#[test]
fn numerical_errors_exit_with_three_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config_path("oscillator"))
        .unwrap()
        .replace("horizon = 10.0", &format!("horizon = {PI:?}"));
    let cfg_path = dir.path().join("pi.toml");
    fs::write(&cfg_path, text).unwrap();
    let out = dir.path().join("out");
    let o = bin().args(["morse", "--config"]).arg(&cfg_path).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_NUMERICAL));
    let record: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(record["error"], "DegenerateEndpoint");
    assert!(!out.exists());

    let mut cfg = config("inverted");
    cfg.initial.x = vec![1.0, 0.0];
    cfg.horizon = 40.0;
    cfg.step = 0.01;
    let err = run_to_dir(&cfg, Command::Flow, &out, false).unwrap_err();
    assert!(matches!(err, CliError::Numerical(jacobi_curves::Error::BlowUp(_))), "{err}");
    assert_eq!(err.exit_code(), EXIT_NUMERICAL);
}

#[test]
fn binary_writes_three_artifacts_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["lderiv", "--config"])
        .arg(config_path("lderiv"))
        .arg("--out")
        .arg(dir.path())
        .args(["--seed", "11"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, vec!["lderiv.csv", "lderiv.json", "provenance.json"]);
    let prov: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("provenance.json")).unwrap()).unwrap();
    assert_eq!(prov["seed"], 11);
    assert!(prov["wall_time_seconds"].is_number());
    let doc = fs::read_to_string(dir.path().join("lderiv.json")).unwrap();
    assert!(!doc.contains("wall_time"));
    let csv = fs::read_to_string(dir.path().join("lderiv.csv")).unwrap();
    assert!(csv.starts_with("t,ind_kernel,L[0][0],"));

    let mut seeded = config("lderiv");
    seeded.seed = 11;
    let lib = run(&seeded, Command::Lderiv, false).unwrap();
    assert_eq!(lib.series.to_csv(), csv);
}
