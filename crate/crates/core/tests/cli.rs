use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn chaintune(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaintune"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn error_kind(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["ok"], false);
    assert!(v["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = chaintune(&["problem"], &dir.path().join("nope.json"), dir.path());
    assert_eq!(error_kind(&out), "io");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"seed": 1, "problem": {"family": "j1j2", "size": 3, "j2": 0.4}, "graph": {"kind": "from_problem"},
            "embedding": {"source": "identity"}, "sweeps": 10}"#,
    );
    let out = chaintune(&["problem"], &cfg, &dir.path().join("out"));
    assert_eq!(error_kind(&out), "format");
}

#[test]
fn identity_embedding_has_no_chains_to_tune() {
    let dir = tempfile::tempdir().unwrap();
    let out = chaintune(&["tune"], &data("tune_identity.json"), dir.path());
    assert!(out.status.success());
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout["ok"], true);
    let tune = read_json(dir.path().join("tune.json"));
    assert_eq!(tune["status"], "no_chains");
    assert!(tune["jc_star"].is_null());
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_chaintune"))
        .args(["problem", "--seed", "77", "--config"])
        .arg(data("tune_identity.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read_json(dir.path().join("config.resolved.json"))["seed"], 77);
}

#[test]
fn gapscan_reaches_logical_gap_at_strong_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"seed": 1, "problem": {{"family": "j1j2", "size": 4, "j2": 0.42}},
                "graph": {{"kind": "pegasus", "m": 3}},
                "embedding": {{"source": "file", "path": {:?}}},
                "gapscan": {{"jc_min": 3.0, "jc_max": 4.0, "jc_step": 0.5}}}}"#,
            data("embedding_4x4_pegasus3.json")
        ),
    );
    let out_dir = dir.path().join("out");
    assert!(chaintune(&["gapscan"], &cfg, &out_dir).status.success());
    let text = std::fs::read_to_string(out_dir.join("gapscan.csv")).unwrap();
    let meta = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("# {key}=")))
            .unwrap()
            .to_string()
    };
    assert_eq!(meta("physical_qubits"), "25");
    assert_eq!(meta("sampler"), "simulated_annealing");
    assert!(!meta("config_hash").is_empty());
    let logical: f64 = meta("logical_delta").parse().unwrap();

    let mut rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let deltas: Vec<f64> = rows
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert_eq!(deltas.len(), 3);
    for d in deltas {
        assert!((d - logical).abs() <= 1e-9, "{d} vs {logical}");
    }
}

#[test]
fn comparison_rows_have_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"seed": 3, "problem": {"family": "fully_connected", "n": 8, "seed": 1},
            "graph": {"kind": "pegasus", "m": 3},
            "embedding": {"source": "heuristic", "seed": 1},
            "sampler": {"sweeps": 100},
            "search_reads": 20, "measure_reads": 50,
            "experiment": {"name": "fig5_6", "n_values": [6]}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = chaintune(&["experiment"], &cfg, &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_dir.join("fig5_6.csv")).unwrap();
    let mut rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rows.headers().unwrap().iter().map(String::from).collect();
    for col in [
        "n",
        "n_t",
        "jc_default",
        "jc_star",
        "jc_optimal",
        "tune_status",
        "p_default",
        "p_optimal",
        "reference_energy",
        "reference_source",
    ] {
        assert!(header.iter().any(|h| h == col), "missing column {col}");
    }
    let records: Vec<_> = rows.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 1);
    let get = |col: &str| records[0][header.iter().position(|h| h == col).unwrap()].to_string();
    assert_eq!(get("n"), "6");
    assert_eq!(get("reference_source"), "exact");
    let p: f64 = get("p_default").parse().unwrap();
    assert!((0.0..=1.0).contains(&p));
}
