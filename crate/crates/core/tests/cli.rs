use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zigzag"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run_dirs(root: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn rerun_gives_identical_csv_and_fresh_directory() {
    let out = tempfile::tempdir().unwrap();
    for threads in ["1", "3"] {
        let st = bin()
            .args(["run", config("10_calibration.json").to_str().unwrap(), "--threads", threads, "--out"])
            .arg(out.path())
            .status()
            .unwrap();
        assert!(st.success());
    }
    let dirs = run_dirs(out.path());
    assert_eq!(dirs.len(), 2);
    assert!(dirs[1].to_string_lossy().ends_with("-2"));
    let a = csv_bodies(&dirs[0]);
    assert!(!a.is_empty());
    assert_eq!(a, csv_bodies(&dirs[1]));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dirs[0].join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 2024);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_flag_overrides_config() {
    let out = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["run", config("06_three_site_oracle.json").to_str().unwrap(), "--seed", "99", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert!(st.success());
    let dir = &run_dirs(out.path())[0];
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    let cases = [
        ("broken.json", "{ \"experiment\": "),
        ("unknown_key.json", r#"{"experiment": "build", "parameters": {"kind": "line", "colour": 1}}"#),
        ("unknown_kind.json", r#"{"experiment": "teleport"}"#),
        ("even_zigzag.json", r#"{"experiment": "build", "parameters": {"kind": "zigzag", "n_sites": 4, "m": 2}}"#),
    ];
    for (name, body) in cases {
        let path = tmp.path().join(name);
        fs::write(&path, body).unwrap();
        let o = bin().arg("run").arg(&path).arg("--out").arg(&out).output().unwrap();
        assert_eq!(o.status.code(), Some(2), "{name}");
        let record: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(record["error"], "schema");
        assert_eq!(record["exit_code"], 2);
        assert!(!out.exists() || run_dirs(&out).is_empty(), "{name} left outputs");
        assert_eq!(bin().arg("validate").arg(&path).output().unwrap().status.code(), Some(2));
    }
}

#[test]
fn missing_config_is_io_error() {
    let o = bin().args(["validate", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn list_is_sorted_with_figures() {
    let o = bin().arg("list").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names.len(), 9);
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(text.lines().all(|l| l.contains("Fig")));
}

#[test]
fn shipped_configs_validate() {
    for e in fs::read_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")).unwrap() {
        let p = e.unwrap().path();
        assert!(bin().arg("validate").arg(&p).status().unwrap().success(), "{}", p.display());
    }
}
