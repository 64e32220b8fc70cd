use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pcfi"));
    c.env_remove("PCFI_CONFIG");
    c
}

fn ex(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn fisher_on_shipped_example() {
    let v = run_json(&["fisher", p(&ex("rho1.json")), p(&ex("example1_channel.json"))]);
    // independent numpy evaluation of the same channel and state
    assert!((v["fisher_information"].as_f64().unwrap() - 0.839_179_6).abs() < 1e-6);
    let probs = v["probabilities"].as_array().unwrap();
    assert_eq!(probs.len(), 9);
    let total: f64 = probs.iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn fisher_csv_layout() {
    let out = run(&["fisher", p(&ex("rho3.json")), p(&ex("example1_channel.json")), "--output-format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "outcome,probability,derivative");
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[10], "fisher_information,0.940988,");
}

#[test]
fn fisher_zero_on_incoherent_state() {
    let v = run_json(&["fisher", p(&ex("incoherent.json")), p(&ex("example1_channel.json"))]);
    assert_eq!(v["fisher_information"].as_f64().unwrap(), 0.0);
}

#[test]
fn broken_channel_exits_two_with_error_json() {
    let out = run(&["fisher", p(&ex("rho1.json")), p(&ex("broken_channel.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "completeness");
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_file_exits_two() {
    let out = run(&["fisher", "/nonexistent/state.json", p(&ex("witness_channel.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "parse");
}

#[test]
fn coherence_modes() {
    let v = run_json(&["coherence", p(&ex("two_qubit_quarter.json"))]);
    assert_eq!(v["mode"], "exact_two_qubit");
    assert!((v["value"].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let v = run_json(&["coherence", p(&ex("incoherent.json"))]);
    assert!(v["value"].as_f64().unwrap().abs() < 1e-8);

    let v = run_json(&["coherence", p(&ex("rho2.json")), "--mode", "unitary-bound"]);
    assert!((v["value"].as_f64().unwrap() - 80.0 / 81.0).abs() < 1e-12);
    let v = run_json(&["coherence", p(&ex("rho2.json")), "--mode", "unitary-bound", "--index", "1"]);
    assert!((v["value"].as_f64().unwrap() - 32.0 / 81.0).abs() < 1e-12);
    assert_eq!(v["generator"], serde_json::json!([1.0, 0.0, 0.0]));

    let out = run(&["coherence", p(&ex("rho1.json")), "--mode", "two-qubit"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certificate_file_reproduces_value() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let v = run_json(&["coherence", p(&ex("rho3.json")), "--mode", "search", "--certificate-out", p(&cert)]);
    assert_eq!(v["certificate_path"], p(&cert));
    let f = run_json(&["fisher", p(&ex("rho3.json")), p(&cert)]);
    let (a, b) = (v["value"].as_f64().unwrap(), f["fisher_information"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-8);
    assert!(a >= 0.940988 - 1e-6, "search should reach the built-in channel value, got {a}");
}

#[test]
fn reproduce_examples_is_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        assert!(run(&["reproduce-examples", "--out", p(d.path())]).status.success());
    }
    for f in ["examples.csv", "fig1.csv"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        let b = std::fs::read(d2.path().join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    let text = std::fs::read_to_string(d1.path().join("examples.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "label,fi_postselective,unitary_bound_full,unitary_bound_fixed1");
    assert_eq!(lines[2], "E2,0.710254,0.987654,0.395062");
    assert_eq!(lines[3], "E3,0.940988,0.888889,0.888889");
    let fig = std::fs::read_to_string(d1.path().join("fig1.csv")).unwrap();
    assert!(fig.starts_with("label,x,fi_postselective,unitary_qfi\nE1,1,"));
}

#[test]
fn search_is_seed_deterministic() {
    let a = run(&["coherence", p(&ex("rho2.json")), "--mode", "search", "--seed", "7"]);
    let b = run(&["coherence", p(&ex("rho2.json")), "--mode", "search", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn qsd_bounds() {
    let v = run_json(&["qsd", p(&ex("orthogonal_pair.json"))]);
    assert!((v["helstrom"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let v = run_json(&["qsd", p(&ex("trine.json"))]);
    assert!(v["helstrom"].is_null());
    assert!((v["pgm_success"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-10);

    let v = run_json(&["qsd", p(&ex("mixed_pair.json")), "--check-equivalence", "--samples", "50"]);
    assert!(v["equivalence"]["max_deviation"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["equivalence"]["samples"], 50);
}

#[test]
fn mle_matches_cramer_rao() {
    let args = |shots: &str| {
        vec![
            "mle".to_string(),
            p(&ex("plus_qubit.json")).into(),
            p(&ex("witness_channel.json")).into(),
            "--shots".into(),
            shots.into(),
            "--trials".into(),
            "200".into(),
            "--seed".into(),
            "3".into(),
        ]
    };
    let a: Vec<String> = args("10000");
    let v = run_json(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((0.8..=1.5).contains(&ratio), "ratio {ratio}");
    let b: Vec<String> = args("20000");
    let w = run_json(&b.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(w["crb"].as_f64().unwrap() * 2.0, v["crb"].as_f64().unwrap());
}

#[test]
fn mle_on_incoherent_state_is_domain_error() {
    let out = run(&["mle", p(&ex("incoherent_qubit.json")), p(&ex("witness_channel.json"))]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "zero_fisher_information");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pcfi.toml");
    std::fs::write(&cfg, "output_format = \"csv\"\nn_restarts = 2\n").unwrap();
    let state = ex("two_qubit_quarter.json");
    let args = ["coherence", p(&state)];

    let out = bin().args(args).env("PCFI_CONFIG", &cfg).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "value,mode\n0.250000,exact_two_qubit\n");

    let out = bin().args(args).args(["--output-format", "json"]).env("PCFI_CONFIG", &cfg).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["mode"], "exact_two_qubit");

    std::fs::write(&cfg, "bogus_key = 1\n").unwrap();
    let out = bin().args(args).args(["--config", p(&cfg)]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "parse");
}

#[test]
fn help_documents_csv_columns_and_exit_codes() {
    let out = run(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("label,fi_postselective,unitary_bound_full,unitary_bound_fixed1"));
    assert!(text.contains("label,x,fi_postselective,unitary_qfi"));
    assert!(text.contains("Exit codes"));
}

#[test]
fn every_shipped_example_loads() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        seen += 1;
        let text = std::fs::read_to_string(&path).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        let name = path.file_name().unwrap().to_str().unwrap();
        let result = if v.get("elements").is_some() {
            pcfi::io::channel_from_json(&text, 1e-9).map(|_| ())
        } else if v.get("priors").is_some() {
            pcfi::io::ensemble_from_json(&text).map(|_| ())
        } else {
            pcfi::io::density_from_json(&text, &Default::default()).map(|_| ())
        };
        if name == "broken_channel.json" {
            assert_eq!(result.unwrap_err().kind(), "completeness");
        } else {
            result.unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
    assert!(seen >= 12);
}
