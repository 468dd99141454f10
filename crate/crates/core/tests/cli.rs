use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_distqml"))
}

#[test]
fn unknown_kind_exits_nonzero_with_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"kind": "teleport", "seed": 3}"#).unwrap();
    let out = bin().args(["run", "-c"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["error"]["code"], "unknown_kind");
}

#[test]
fn reruns_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("inference.json");
    std::fs::write(&cfg, r#"{"kind": "inference", "seed": 11, "params": {"n_qubits": 4, "layers": 3, "shots": 100}}"#).unwrap();
    let mut summaries = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let status = bin().args(["run", "-c"]).arg(&cfg).arg("--out-dir").arg(&out_dir).output().unwrap().status;
        assert!(status.success());
        summaries.push(std::fs::read(out_dir.join("summary.json")).unwrap());
    }
    assert_eq!(summaries[0], summaries[1]);
    let v: serde_json::Value = serde_json::from_slice(&summaries[0]).unwrap();
    assert_eq!(v["ledger"]["qubits_sent"], 2400);
    assert_eq!(v["seed"], 11);
}

#[test]
fn list_names_every_kind() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let cat: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cat.len(), 10);
    for kind in ["inference", "gradcheck", "dpcd", "stdgd", "stdft", "linclass", "spectrum", "seprank", "universal", "dataparallel"] {
        assert!(cat.iter().any(|e| e["kind"] == kind), "{kind}");
    }
}

#[test]
fn kind_subcommand_and_batch() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--seed", "4", "spectrum", "--params", r#"{"n_prime": 4, "layers": 2}"#])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["measured_count"], 24);

    std::fs::write(dir.path().join("one.json"), r#"{"kind": "dataparallel", "seed": 1, "params": {"rows": 4, "cols": 2}}"#).unwrap();
    std::fs::write(dir.path().join("two.json"), r#"{"kind": "seprank", "seed": 2, "params": {"n_prime": 2, "layers": 2}}"#).unwrap();
    std::fs::write(dir.path().join("list.txt"), "one.json\n# comment\ntwo.json\n").unwrap();
    let status = bin().args(["batch", "-l"]).arg(dir.path().join("list.txt")).arg("--out-dir").arg(dir.path().join("out")).status().unwrap();
    assert!(status.success());
    assert!(dir.path().join("out/000-dataparallel/summary.json").exists());
    assert!(dir.path().join("out/001-seprank/series.csv").exists());
}

#[test]
fn invalid_params_are_machine_readable() {
    let out = bin().args(["spectrum", "--params", r#"{"n_prime": 4}"#]).output().unwrap();
    assert!(!out.status.success());
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["error"]["code"], "invalid_config");
}
