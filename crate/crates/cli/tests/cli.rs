use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cbrank::rank_tree::FamilyFile;
use cbrank::FamilySequence;

fn cbrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbrank"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cb_prints_levels() {
    let out = cbrank(&["cb", "--lambda", "w^2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "height: 3\n0 aleph0\n1 aleph0\n2 1\n");

    let out = cbrank(&["cb", "--lambda", "9"]);
    assert_eq!(stdout(&out), "height: 1\n0 10\n");

    let out = cbrank(&["--json", "cb", "--lambda", "w*3 + 1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["levels"], serde_json::json!(["aleph0", 3]));
}

#[test]
fn cb_rejects_malformed_literals() {
    let out = cbrank(&["cb", "--lambda", "w^^2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 2"));

    let out = cbrank(&["cb", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = cbrank(&["cb", "--lambda", "w", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rank_and_friends_on_small_files() {
    let tmp = tempfile::tempdir().unwrap();
    let pair = write(
        tmp.path(),
        "pair.json",
        r#"{"universe": 4, "families": [[[0,1]], [[1,2]]]}"#,
    );
    let empty = write(
        tmp.path(),
        "empty.json",
        r#"{"universe": 3, "families": []}"#,
    );
    let three = write(
        tmp.path(),
        "fam3.json",
        r#"{"universe": 4, "families": [[[0,1]], [[1,2]], [[0]]]}"#,
    );

    assert_eq!(
        stdout(&cbrank(&["rank", "--input", arg(&pair)])),
        "rank: 2\n"
    );
    assert_eq!(
        stdout(&cbrank(&["rank", "--naive", "--input", arg(&pair)])),
        "rank: 2\n"
    );
    assert_eq!(
        stdout(&cbrank(&["rank", "--parallel", "--input", arg(&pair)])),
        "rank: 2\n"
    );
    assert_eq!(
        stdout(&cbrank(&["rank", "--input", arg(&empty)])),
        "rank: 0\n"
    );
    assert_eq!(
        stdout(&cbrank(&["mrank", "--input", arg(&three), "--m", "2"])),
        "mrank: 1\n"
    );
    assert_eq!(
        stdout(&cbrank(&["indep", "--input", arg(&pair)])),
        "independent: true\n"
    );
    assert_eq!(
        stdout(&cbrank(&["indep", "--input", arg(&three)])),
        "independent: false\nempty_cell: 000\n"
    );

    let out = cbrank(&["mrank", "--input", arg(&three), "--m", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dot_export_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let pair = write(
        tmp.path(),
        "pair.json",
        r#"{"universe": 4, "families": [[[0,1]], [[1,2]]]}"#,
    );
    let (a, b) = (tmp.path().join("a.dot"), tmp.path().join("b.dot"));
    for dot in [&a, &b] {
        assert!(cbrank(&["rank", "--input", arg(&pair), "--dot", arg(dot)])
            .status
            .success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("digraph"));
    assert!(text.contains("(0,{0,1}) (1,{1,2})"));
}

#[test]
fn malformed_family_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{"),
        ("unsorted.json", r#"{"universe": 4, "families": [[[1,0]]]}"#),
        ("outside.json", r#"{"universe": 2, "families": [[[5]]]}"#),
        (
            "extra.json",
            r#"{"universe": 2, "families": [], "note": 1}"#,
        ),
    ];
    for (name, body) in cases {
        let path = write(tmp.path(), name, body);
        let out = cbrank(&["rank", "--input", arg(&path)]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    let out = cbrank(&["rank", "--input", arg(&tmp.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));

    let big = write(
        tmp.path(),
        "big.json",
        r#"{"universe": 9, "families": [[[0]]]}"#,
    );
    let out = cbrank(&["rank", "--naive", "--input", arg(&big)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at most 8"));
}

#[test]
fn lemma4_reports() {
    let out = cbrank(&["lemma4", "--k", "3", "--per-level", "9"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("status: pass"));
    assert!(text.contains("achieved_rank: 3"));

    let out = cbrank(&["lemma4", "--k", "2", "--per-level", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("status: fail"));

    let out = cbrank(&["lemma4", "--k", "3", "--sweep"]);
    assert!(stdout(&out).contains("smallest_passing_per_level: 2"));

    assert_eq!(cbrank(&["lemma4", "--k", "9"]).status.code(), Some(2));
}

#[test]
fn trace_check_and_random_exp() {
    let out = cbrank(&["trace-check", "--k", "2", "--trials", "20", "--seed", "3"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("violations: 0"));
    assert_eq!(
        cbrank(&["trace-check", "--k", "5", "--trials", "1", "--seed", "3"])
            .status
            .code(),
        Some(2)
    );

    let out = cbrank(&[
        "--json",
        "random-exp",
        "--universe",
        "6",
        "--gamma",
        "2",
        "--members",
        "2",
        "--trials",
        "10",
        "--seed",
        "1",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["parameters"]["trials"], 10);
    assert_eq!(v["mrank"].as_array().unwrap().len(), 3);
    assert_eq!(
        cbrank(&[
            "random-exp",
            "--universe",
            "30",
            "--gamma",
            "2",
            "--members",
            "2",
            "--trials",
            "1",
            "--seed",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn dumped_files_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("dump");
    let out = cbrank(&[
        "random-exp",
        "--universe",
        "7",
        "--gamma",
        "3",
        "--members",
        "3",
        "--trials",
        "6",
        "--seed",
        "12",
        "--dump",
        arg(&dir),
    ]);
    assert!(out.status.success());
    let expected = cbrank::lab::random_family_sequences(7, 3, 3, 6, 12).unwrap();
    for (i, fs) in expected.iter().enumerate() {
        let path = dir.join(format!("trial_{i:04}.json"));
        let file: FamilyFile = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(&FamilySequence::from_file(&file).unwrap(), fs);
        let shown = stdout(&cbrank(&["rank", "--input", arg(&path)]));
        assert_eq!(shown, format!("rank: {}\n", fs.rank()));
    }
}
