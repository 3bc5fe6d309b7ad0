use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn altprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altprobe")).args(args).output().unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn synth(dir: &Path) -> PathBuf {
    let store = dir.join("s.altprobe");
    let out = altprobe(&[
        "synth-store",
        "--lava",
        &data("lava_fixture.tsv"),
        "--fava",
        &data("fava_fixture.tsv"),
        "--out",
        store.to_str().unwrap(),
        "--sigma",
        "0",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    store
}

#[test]
fn word_probe_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let store = synth(dir.path());
    let results = dir.path().join("r.csv");
    let out = altprobe(&[
        "word-probe",
        "--lava",
        &data("lava_fixture.tsv"),
        "--fava",
        &data("fava_fixture.tsv"),
        "--store",
        store.to_str().unwrap(),
        "--layers",
        "1-2",
        "--frame",
        "there.there",
        "--frame",
        "caus_inch.causative",
        "--out",
        results.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&results).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let out = altprobe(&["report", "--input", results.to_str().unwrap()]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("there.there") && table.contains("1.000 [1]"), "{table}");
    assert!(table.contains("caus_inch.causative*"), "{table}");
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let store = synth(dir.path());
    let common = ["--lava", &data("lava_fixture.tsv"), "--fava", &data("fava_fixture.tsv")];
    let cases: Vec<Vec<&str>> = vec![
        vec!["word-probe", "--store", store.to_str().unwrap(), "--frame", "there.nowhere"],
        vec!["word-probe", "--store", store.to_str().unwrap(), "--layers", "9"],
        vec!["control", "--store", store.to_str().unwrap(), "--frame", "spray_load.with", "--k", "4", "--l2", "0.1"],
        vec!["control", "--store", store.to_str().unwrap(), "--frame", "there.no_there"],
    ];
    for case in cases {
        let mut args = vec![case[0]];
        args.extend(common);
        args.extend(&case[1..]);
        let out = altprobe(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn missing_input_is_not_a_validation_error() {
    let out = altprobe(&["report", "--input", "/nonexistent/results.csv"]);
    assert_eq!(out.status.code(), Some(1));
}
