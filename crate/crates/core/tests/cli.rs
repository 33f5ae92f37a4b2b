//! Golden-file snapshots of the shipped scripts. `UPDATE_GOLDEN=1` rewrites them.

use std::path::{Path, PathBuf};
use std::process::Command;

fn scripts_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts")
}

fn scripts() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scripts_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cusp"))
        .collect();
    v.sort();
    v
}

fn run(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_cusp")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout, out.stderr)
}

fn run_json(script: &Path) -> (i32, Vec<u8>) {
    let (code, out, _) = run(&["run", "--json", script.to_str().unwrap()]);
    (code, out)
}

#[test]
fn shipped_scripts_match_goldens() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    assert!(scripts().len() >= 8);
    for s in scripts() {
        let (code, first) = run_json(&s);
        assert_eq!(code, 0, "{} exited with {code}", s.display());
        let golden = s.with_extension("json");
        if update {
            std::fs::write(&golden, &first).unwrap();
        }
        let expected = std::fs::read(&golden).unwrap_or_else(|_| panic!("missing {}", golden.display()));
        assert!(first == expected, "{} differs from its golden file", s.display());
        let (_, second) = run_json(&s);
        assert!(first == second, "{} is not deterministic", s.display());
    }
}

#[test]
fn json_carries_schema_and_config() {
    let (_, out) = run_json(&scripts_dir().join("products.cusp"));
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["schema"], "cusp/1");
    assert_eq!(v["config"]["budget"], 10_000);
    assert_eq!(v["asserts"]["failed"], 0);
}

fn temp_script(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cusp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn exit_codes() {
    let ok = temp_script("ok.cusp", "semigroup E = builtin(twopoint)\nassert (product E, E).size == 4\n");
    let failed = temp_script("failed.cusp", "semigroup E = builtin(twopoint)\nassert (product E, E).size == 3\n");
    let broken = temp_script("broken.cusp", "semigroup E = builtin(twopoint)\nproduct E, Q\n");
    assert_eq!(run(&["run", ok.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["run", failed.to_str().unwrap()]).0, 1);
    let (code, _, err) = run(&["run", broken.to_str().unwrap()]);
    assert_eq!(code, 2);
    let err = String::from_utf8(err).unwrap();
    assert!(err.contains(":2:12: error: unknown identifier `Q`"), "{err}");
    assert_eq!(run(&["check", broken.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["check", ok.to_str().unwrap()]).0, 0);
}

#[test]
fn seed_changes_only_sampled_output() {
    let s = scripts_dir().join("ultra_two_point.cusp");
    let (_, a, _) = run(&["run", "--json", "--seed", "3", s.to_str().unwrap()]);
    let (_, b, _) = run(&["run", "--json", "--seed", "3", s.to_str().unwrap()]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["asserts"]["failed"], 0);
}
