use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn ctoe(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctoe"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--no-cache")
        .output()
        .expect("spawn ctoe")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("JSON error report")
}

#[test]
fn km_reports_shortest_program() {
    let dir = tempfile::tempdir().unwrap();
    let o = ctoe(&["km", "--target", "11", "--max-len", "6"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let km = read_json(&dir.path().join("km.json"));
    assert_eq!(km["l"], 6);
    assert_eq!(km["q_min"], "001001");
}

#[test]
fn localization_bits() {
    let dir = tempfile::tempdir().unwrap();
    let o = ctoe(&["experiment", "localization"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("localization.csv")).unwrap();
    assert_eq!(
        csv,
        "locations,bits\n8,3\n7000000000,33\n30000000000000000000000,75\n"
    );
}

#[test]
fn manifest_hashes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = ctoe(&["predict", "--target", "1", "--max-len", "8"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["command"], "predict");
    let entries = manifest["artifacts"].as_array().unwrap();
    assert!(!entries.is_empty());
    let mut listed: Vec<String> = Vec::new();
    for e in entries {
        let name = e["file"].as_str().unwrap();
        let bytes = fs::read(dir.path().join(name)).unwrap();
        assert_eq!(e["bytes"], bytes.len());
        assert_eq!(e["sha256"], hex::encode(Sha256::digest(&bytes)));
        listed.push(name.into());
    }
    for f in fs::read_dir(dir.path()).unwrap() {
        let name = f.unwrap().file_name().into_string().unwrap();
        assert!(name == "manifest.json" || listed.contains(&name), "{name} unlisted");
    }
}

fn artifacts_without_timestamp(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|f| {
            let p = f.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let bytes = if name == "manifest.json" {
                let mut m = read_json(&p);
                m.as_object_mut().unwrap().remove("created_unix");
                m.as_object_mut().unwrap().remove("config");
                serde_json::to_vec(&m).unwrap()
            } else {
                fs::read(&p).unwrap()
            };
            (name, bytes)
        })
        .collect();
    files.sort();
    files
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["experiment", "nfl", "--max-len", "9", "--trials", "200", "-t", "2", "-n", "3", "--seed", "7"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(ctoe(&args, a.path()).status.success());
    assert!(ctoe(&args, b.path()).status.success());
    assert_eq!(artifacts_without_timestamp(a.path()), artifacts_without_timestamp(b.path()));
}

#[test]
fn shard_count_does_not_change_results() {
    let base = ["experiment", "nfl", "--max-len", "9", "--trials", "200", "-t", "2", "-n", "3"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one: Vec<&str> = base.iter().copied().chain(["--shards", "1"]).collect();
    let four: Vec<&str> = base.iter().copied().chain(["--shards", "4"]).collect();
    assert!(ctoe(&one, a.path()).status.success());
    assert!(ctoe(&four, b.path()).status.success());
    for f in ["nfl.csv", "nfl.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn bad_target_exits_2_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = ctoe(&["km", "--target", "1a"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["status"], "error");
    assert_eq!(e["field"], "targets");
}

#[test]
fn unknown_subcommand_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = ctoe(&["bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["kind"], "invalid-arguments");
}

#[test]
fn oversized_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "command = \"km\"\ntargets = [\"1\"]\nmax_len = 40\n").unwrap();
    let o = ctoe(&["--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["field"], "max_len");
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "command = \"km\"\ntargets = [\"11\"]\nmax_len = 6\n").unwrap();
    let out = dir.path().join("out");
    let o = ctoe(&["--config", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&out.join("km.json"))["q_min"], "001001");
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "command = \"km\"\nbogus = 1\n").unwrap();
    let o = ctoe(&["--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = ctoe(&["select", "--target", "1", "--pair", "000:ident:1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["kind"], "runtime");
}
