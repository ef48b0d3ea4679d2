//! Exit-code and file-format contracts of the command-line front end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lefgrowth"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn permissible_validation_exit_codes() {
    let ok = run(&["permissible", "--builtin", "pow2"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    assert!(stdout(&ok).contains("\"ok\": true"));

    let bad = run(&["permissible", "--table", "1,2,3,10"]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("violations"));

    let usage = run(&["permissible"]);
    assert_eq!(code(&usage), 2);
}

#[test]
fn witness_verify_roundtrip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let out = run(&[
        "witness",
        "--builtin",
        "linear",
        "--level",
        "2",
        "--seed",
        "7",
        "--pairs",
        "5000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("\"verified\": true"));

    let ok = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));

    // Corrupt one mapping entry: verification must fail with a printed
    // counterexample.
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let table = doc["witness"]["table"].as_array_mut().unwrap();
    let first = table[0][1].as_str().unwrap().to_owned();
    let swapped = table
        .iter()
        .map(|row| row[1].as_str().unwrap().to_owned())
        .find(|v| *v != first)
        .expect("a second distinct image");
    doc["witness"]["table"][0][1] = serde_json::Value::String(swapped);
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let bad = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("counterexample"), "{}", stdout(&bad));

    // Unreadable input is a usage error, not a mathematical failure.
    fs::write(&path, "not json").unwrap();
    assert_eq!(code(&run(&["verify", path.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["verify", "/nonexistent/w.json"])), 2);
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let manifest = dir.path().join("run.json");
    let out = run(&[
        "omega",
        "--builtin",
        "linear",
        "--depth",
        "6",
        "--dot",
        "omega.dot",
        "--growth-csv",
        "growth.csv",
        "--out-dir",
        d,
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(dir.path().join("omega.dot").exists());
    assert!(dir.path().join("growth.csv").exists());

    let replayed = run(&["replay", manifest.to_str().unwrap()]);
    assert_eq!(code(&replayed), 0, "{}", stdout(&replayed));
    assert!(stdout(&replayed).contains("byte-identically"));

    // A manifest whose recorded digest disagrees with what the command
    // produces is reported as a reproduction failure.
    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    doc["outputs"][0]["sha256"] = serde_json::Value::String("00".repeat(32));
    fs::write(&manifest, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let tampered = run(&["replay", manifest.to_str().unwrap()]);
    assert_eq!(code(&tampered), 1, "{}", stdout(&tampered));
    assert!(stdout(&tampered).contains("counterexample"), "{}", stdout(&tampered));
}

#[test]
fn coset_runs_report_status_by_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pres.txt");

    fn write_pres(path: &Path, text: &str) {
        fs::write(path, text).unwrap();
    }

    // Four involutions on a path, adjacent pairs braiding and disjoint
    // pairs commuting: 120 cosets.
    write_pres(
        &path,
        "a b c d\naa\nbb\ncc\ndd\nababab\nbcbcbc\ncdcdcd\nacac\nadad\nbdbd\n",
    );
    let out = run(&["tc", "run", "--file", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("\"status\": \"complete\""));
    assert!(stdout(&out).contains("\"cosets\": 120"));

    // A free group never closes: hitting the cap is an abort.
    write_pres(&path, "a b\n");
    let aborted = run(&[
        "tc",
        "run",
        "--file",
        path.to_str().unwrap(),
        "--cap",
        "40",
    ]);
    assert_eq!(code(&aborted), 1);
    assert!(stdout(&aborted).contains("\"status\": \"aborted\""));
}

#[test]
fn empty_bound_ranges_emit_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let out = run(&[
        "bounds",
        "--builtin",
        "linear",
        "--flavor",
        "sym",
        "--range",
        "5:4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(
        fs::read_to_string(&csv).unwrap(),
        "radius,lower_bound,lower_provenance,upper_bound,upper_provenance,notes\n"
    );
}
