use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn relmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relmat")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = relmat(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    relmat(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "{name} drifted; rerun with UPDATE_GOLDEN=1 after review");
}

#[test]
fn help_is_stable() {
    golden("help.txt", &ok(&["--help"]));
    for sub in ["generate", "render", "solve", "eval", "export-asp", "fixtures", "emit-observations"] {
        golden(&format!("help-{sub}.txt"), &ok(&[sub, "--help"]));
    }
}

#[test]
fn solve_union_fixture_prints_presence_union() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fixtures", "--out", p(dir.path())]);
    let out = ok(&["solve", p(&dir.path().join("union.atoms"))]);
    assert!(out.starts_with("outcome: unique 2\n"), "{out}");
    assert!(out.contains("truth: 2 (Accurate)"));
    assert!(out.lines().any(|l| l.trim() == "all presence union row"), "{out}");
    let json = ok(&["solve", "--json", p(&dir.path().join("union.atoms"))]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["outcome"]["Unique"], 2);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["generate", "--size", "0", "--out", p(dir.path())]), 2);
    assert_eq!(code(&["solve", "--no-such-flag", "x"]), 2);
    assert_eq!(code(&[]), 2);
}

#[test]
fn distinct_failure_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.atoms");
    assert_eq!(code(&["solve", p(&missing)]), 4);
    let bad = dir.path().join("bad.atoms");
    fs::write(&bad, "@format relmat-atoms 1\ncell(q1\n").unwrap();
    let out = relmat(&["solve", p(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.atoms:2:"));
    let corpus = dir.path().join("c");
    ok(&["generate", "--seed", "1", "--size", "3", "--out", p(&corpus)]);
    assert_eq!(code(&["eval", "--corpus", p(&corpus), "--ablate", "drop-atoms:mood"]), 6);
}

#[test]
fn eval_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    ok(&["generate", "--seed", "11", "--size", "25", "--out", p(&corpus)]);
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    let a = ["eval", "--corpus", p(&corpus), "--scaling", "4,8", "--ablate", "drop-atoms:all"];
    let s1 = ok(&[&a[..], &["--report", p(&r1)]].concat());
    let s2 = ok(&[&a[..], &["--report", p(&r2), "--sequential"]].concat());
    assert_eq!(s1, s2);
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&r1).unwrap()).unwrap();
    assert_eq!(v["accuracy"]["total"], 25);
    assert_eq!(v["scaling"]["points"].as_array().unwrap().len(), 2);
    assert!(s1.contains("Problem Solving Accuracy"));
}

#[test]
fn render_export_and_observer_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let train = dir.path().join("train");
    ok(&["generate", "--seed", "2", "--size", "2", "--out", p(&corpus)]);
    let out = ok(&["render", "--corpus", p(&corpus), "--out", p(&train), "--sheets"]);
    assert!(out.contains("wrote 32 images"));
    assert!(train.join("sheets/p000001.png").is_file());
    let labels = fs::read_to_string(train.join("labels.jsonl")).unwrap();
    assert_eq!(labels.lines().count(), 32);

    // A perfect observer: labels become predictions unchanged.
    let preds: String = labels
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            for h in v["heads"].as_array_mut().unwrap() {
                for k in ["layer", "slot"] {
                    h[k] = h[k].as_i64().unwrap().max(0).into();
                }
                for (_, t) in h["traits"].as_object_mut().unwrap() {
                    *t = t.as_i64().unwrap().max(0).into();
                }
            }
            v.as_object_mut().unwrap().remove("image");
            v.to_string() + "\n"
        })
        .collect();
    let pred_path = dir.path().join("preds.jsonl");
    fs::write(&pred_path, preds).unwrap();
    let obs = dir.path().join("obs");
    ok(&[
        "emit-observations",
        "--schema",
        p(&train.join("schema.json")),
        "--predictions",
        p(&pred_path),
        "--out",
        p(&obs),
    ]);
    let table = ok(&["eval", "--corpus", p(&corpus), "--observations", p(&obs)]);
    assert!(table.contains("image+observer"));
    assert!(table.contains("100.00%"), "{table}");

    let asp = ok(&["export-asp", p(&corpus.join("problems/p000000.atoms"))]);
    assert!(asp.contains("at(q1,1,1)."));
    assert!(!asp.contains("truth"));
}
