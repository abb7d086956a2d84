use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_riesz-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_matrix(dir: &Path, name: &str, entries: &[[&str; 2]; 2]) -> std::path::PathBuf {
    let path = dir.join(name);
    let json = serde_json::json!({
        "entries": [[entries[0][0], entries[0][1]], [entries[1][0], entries[1][1]]],
        "domain": {"kind": "seq_l_inf", "dim": 2},
        "range": {"kind": "seq_l_inf", "dim": 2},
    });
    std::fs::write(&path, serde_json::to_string(&json).unwrap()).unwrap();
    path
}

#[test]
fn verify_passes() {
    let out = run(&["verify", "--dims", "1..4"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("all checks passed"));
}

#[test]
fn modulus_prints_entrywise_abs_and_checks_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "op.json", &[["1", "-2"], ["-3", "4"]]);
    let out = run(&["modulus", "--matrix", path.to_str().unwrap(), "--x", "1,1"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("[1, 2]"));
    assert!(text.contains("[3, 4]"));
    assert!(text.contains("(3, 7)"));
    assert!(text.contains("oracle agrees"));

    // zero matrix maps to the zero matrix
    let zero = write_matrix(dir.path(), "zero.json", &[["0", "0"], ["0", "0"]]);
    let out = run(&["modulus", "--matrix", zero.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("[0, 0]"));

    // parse failure is a validation error (exit 1)
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "not json").unwrap();
    let out = run(&["modulus", "--matrix", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dominate_reports_yes_no_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_matrix(dir.path(), "t.json", &[["1", "-2"], ["-3", "4"]]);
    let s = write_matrix(dir.path(), "s.json", &[["2", "2"], ["3", "4"]]);
    let out = run(&["dominate", s.to_str().unwrap(), t.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("dominates: yes"));

    let out = run(&["dominate", t.to_str().unwrap(), s.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dominates: no"));
    assert!(text.contains("witness"));
}

#[test]
fn counterexample_registry_and_certificates() {
    let out = run(&["counterexample", "tents"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("**fails**"));
    assert!(text.contains("| 64 | 1 |"), "constant-norm table through K = 64");

    let out = run(&["counterexample", "l1-am"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("| 16 | 16 |"), "defect curve reaches (16, 16)");

    let out = run(&["counterexample", "no-such-thing"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("c0-projections"), "registry listed on unknown name");
}

#[test]
fn probe_list_and_single_probe() {
    let out = run(&["probe", "list"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("am_identity"));

    let out = run(&["probe", "projection_gap"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("verdict"));

    let out = run(&["probe", "made-up"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_runs_configs_and_respects_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    let out_prefix = dir.path().join("run");
    let config = serde_json::json!({
        "probes": [
            {"name": "am_identity", "params": {"tag": {"kind": "seq_l_inf", "dim": 4}}},
            {"name": "solidity", "params": {"tag": {"kind": "seq_l1", "dim": 3}}}
        ],
        "seed": 5,
        "output": out_prefix.to_str().unwrap(),
        "format": "both"
    });
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();

    let out = run(&["report", "--config", config_path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let manifest_path = dir.path().join("run.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 5);
    assert_eq!(manifest["reports"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("run.report.md").exists());

    // byte-identical across reruns
    let bytes_a = std::fs::read(&manifest_path).unwrap();
    let out = run(&["report", "--config", config_path.to_str().unwrap()]);
    assert!(out.status.success());
    let bytes_b = std::fs::read(&manifest_path).unwrap();
    assert_eq!(bytes_a, bytes_b);

    // the env variable overrides the config seed
    let out = bin()
        .args(["report", "--config", config_path.to_str().unwrap()])
        .env("RIESZ_LAB_SEED", "77")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 77);

    // and the flag beats the env variable
    let out = bin()
        .args([
            "report",
            "--config",
            config_path.to_str().unwrap(),
            "--seed",
            "123",
        ])
        .env("RIESZ_LAB_SEED", "77")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 123);
}

#[test]
fn report_rejects_invalid_configs_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    // parameters that fail a probe precondition: levi wants an increasing family
    let config = serde_json::json!({
        "probes": [
            {"name": "levi", "params": {"family": "tents", "dim": null, "stabilize_at": null, "upto": 8}}
        ],
        "output": dir.path().join("x").to_str().unwrap()
    });
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let out = run(&["report", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("levi") && err.contains("family"), "names probe and path: {err}");

    let out = run(&["report", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn probe_failure_verdicts_are_still_successful_runs() {
    // a probe whose verdict is "fails" exits 0: failure verdicts are results
    let out = run(&["probe", "nb_bounded_identity"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("**fails**"));
}
