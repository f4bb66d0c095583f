//! End-to-end runs of the ctlab binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ctlab_core::zoo::fixtures;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn threshold_fixtures(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    (
        write_json(dir, "s1.json", &fixtures::s1()),
        write_json(dir, "z1.json", &fixtures::z1()),
        write_json(dir, "psi.json", &fixtures::s1_depth()),
    )
}

#[test]
fn eval_reports_signature_and_answer() {
    let dir = tempfile::tempdir().unwrap();
    let (s, z, _) = threshold_fixtures(dir.path());
    let out = run(&[
        "eval",
        "--structure",
        s.to_str().unwrap(),
        "--problem",
        z.to_str().unwrap(),
        "--input",
        "3",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["signature"], "11");
    assert_eq!(v["answers"], serde_json::json!([12]));
}

#[test]
fn optimize_finds_depth_two_tree() {
    let dir = tempfile::tempdir().unwrap();
    let (s, z, psi) = threshold_fixtures(dir.path());
    let tree_path = dir.path().join("tree.json");
    let out = run(&[
        "optimize",
        "--structure",
        s.to_str().unwrap(),
        "--problem",
        z.to_str().unwrap(),
        "--measure",
        psi.to_str().unwrap(),
        "--mode",
        "det",
        "--out",
        tree_path.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"], 2);
    let tree: ctlab_core::ComputationTree =
        serde_json::from_str(&std::fs::read_to_string(&tree_path).unwrap()).unwrap();
    tree.validate().unwrap();
}

#[test]
fn zoo_build_feeds_zoo_problem_and_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["zoo", "build", "--pi", "6", "--trunc", "3:0..7"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let s = write_json(dir.path(), "pi6.json", &v["structure"]);
    let psi = write_json(dir.path(), "psi6.json", &v["measure"]);
    let out = run(&[
        "zoo",
        "problem",
        "--structure",
        s.to_str().unwrap(),
        "--kind",
        "z6",
        "--index",
        "2",
    ]);
    let z = write_json(
        dir.path(),
        "z6.json",
        &serde_json::from_str::<serde_json::Value>(&stdout(&out)).unwrap(),
    );
    let out = run(&[
        "optimize",
        "--structure",
        s.to_str().unwrap(),
        "--problem",
        z.to_str().unwrap(),
        "--measure",
        psi.to_str().unwrap(),
        "--mode",
        "nondet",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["value"], 2);
    // And atom 5 (the 2m+1 point) evaluates to answer 2.
    let out = run(&[
        "eval",
        "--structure",
        s.to_str().unwrap(),
        "--problem",
        z.to_str().unwrap(),
        "--input",
        "5",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["answers"], serde_json::json!([2]));
}

#[test]
fn typelab_predicts_block_families() {
    let out = run(&["typelab", "--tau", "2:1,3:inf", "--n", "1..3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let fams: Vec<u64> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["family"].as_u64().unwrap())
        .collect();
    assert_eq!(fams, [2, 3, 3]);
    let out = run(&["typelab", "--lattice"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["hasse"][0], serde_json::json!([1, 2]));
    assert_eq!(v["families"].as_array().unwrap().len(), 7);
}

#[test]
fn inconsistent_profile_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // An observed infinite value pins epsilon; the diagonal predicts gamma.
    let profiles = serde_json::json!([{
        "profile": {
            "upper": true, "b": "i", "c": "i", "family": "probe",
            "values": [{"kind": "infinity"}]
        },
        "hints": { "domain_infinite": null, "bounded": null }
    }]);
    let p = write_json(dir.path(), "profiles.json", &profiles);
    let out = run(&[
        "typelab",
        "--tau",
        "2:inf",
        "--n",
        "1",
        "--profiles",
        p.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn validation_failures_exit_one() {
    let out = run(&[
        "eval",
        "--structure",
        "/nonexistent.json",
        "--problem",
        "/nonexistent.json",
        "--input",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("structured error on stderr");
    assert!(err["error"].is_string());

    let out = bin().args(["optimize", "--mode", "sideways"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "usage errors exit 1");
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (s, z, psi) = threshold_fixtures(dir.path());
    let mut outs = Vec::new();
    for threads in ["1", "4"] {
        let out = run(&[
            "--threads",
            threads,
            "optimize",
            "--structure",
            s.to_str().unwrap(),
            "--problem",
            z.to_str().unwrap(),
            "--measure",
            psi.to_str().unwrap(),
            "--mode",
            "nondet",
        ]);
        outs.push(stdout(&out));
    }
    assert_eq!(outs[0], outs[1]);
}
