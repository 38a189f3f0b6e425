use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mpdt_core::cnf::read_wcnf_file;
use mpdt_core::DecisionTree;

fn mpdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpdt"))
        .args(args)
        .env_remove("MPDT_TIMEOUT")
        .output()
        .expect("run mpdt")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn conflicting_rows_exit_2_with_listing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "c.csv", "a,b,target\n0,0,0\n0,1,1\n0,1,0\n1,1,1\n");
    let o = mpdt(&["train", s(&csv), "--out", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rows [1, 2]"));
    let o = mpdt(&["train", s(&csv), "--resolve-conflicts", "majority", "--resplits", "0", "--out", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn encode_soft_count_and_bad_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "one.csv", "x,target\n0,0\n1,1\n");
    let wcnf = dir.path().join("one.wcnf");
    let o = mpdt(&["encode", s(&csv), "--ub", "7", "--out", s(&wcnf)]);
    assert_eq!(o.status.code(), Some(0));
    let f = read_wcnf_file(&wcnf).unwrap();
    assert_eq!(f.soft.len(), 4);
    assert!(dir.path().join("one.layout.json").exists());

    let o = mpdt(&["encode", s(&csv), "--ub", "4", "--out", s(&wcnf)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn encode_auto_bound_sets_top() {
    let dir = tempfile::tempdir().unwrap();
    let wcnf = dir.path().join("mux.wcnf");
    let o = mpdt(&["encode", &data("mux6.csv"), "--out", s(&wcnf)]);
    assert_eq!(o.status.code(), Some(0));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("mux.layout.json")).unwrap()).unwrap();
    let ub = side["ub"].as_u64().unwrap();
    let header = std::fs::read_to_string(&wcnf).unwrap();
    let top: u64 = header.lines().next().unwrap().split_whitespace().nth(4).unwrap().parse().unwrap();
    assert_eq!(top, ub.div_ceil(2) + 1);
}

#[test]
fn train_evaluate_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mux");
    let o = mpdt(&["train", &data("mux6.csv"), "--resplits", "5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("tree size         15"), "{text}");
    for f in ["model.json", "solutions.json", "tree.dot", "report.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let model = out.join("model.json");
    for part in ["test", "train"] {
        let o = mpdt(&["evaluate", &data("mux6.csv"), "--model", s(&model), "--part", part]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).starts_with("accuracy 100.00"), "{part}: {}", stdout(&o));
    }
    let o = mpdt(&["evaluate", &data("mux6.csv"), "--model", s(&model), "--resplits", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("mean test accuracy 100.00 over 50"), "{}", stdout(&o));

    let narrow = write(dir.path(), "narrow.csv", "x,target\n0,0\n1,1\n");
    let o = mpdt(&["evaluate", s(&narrow), "--model", s(&model)]);
    assert_eq!(o.status.code(), Some(1));

    let json = dir.path().join("m.json");
    assert_eq!(mpdt(&["export", "--model", s(&model), "--format", "json", "--out", s(&json)]).status.code(), Some(0));
    assert_eq!(DecisionTree::read_json(&json).unwrap(), DecisionTree::read_json(&model).unwrap());
    let dot = dir.path().join("m.dot");
    let o = mpdt(&["export", "--model", s(&model), "--out", s(&dot), "--data", &data("mux6.csv")]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(dot).unwrap();
    assert!(dot.starts_with("digraph") && dot.contains("A0"));
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = mpdt(&["train", &data("corral.csv"), "--seed", "3", "--resplits", "4", "--out", s(&a)]);
    assert_eq!(o.status.code(), Some(0));
    let o = mpdt(&["train", "--from-manifest", s(&a.join("manifest.json")), "--out", s(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["model.json", "report.json", "solutions.json", "tree.dot"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn expired_budget_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = Command::new(env!("CARGO_BIN_EXE_mpdt"))
        .args(["train", &data("mux6.csv"), "--fallback-greedy", "--out", s(&out)])
        .env("MPDT_TIMEOUT", "0.000000001")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let greedy = DecisionTree::read_json(out.join("model.json")).unwrap();
    assert!(greedy.size() >= 15);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn sat_and_maxsat_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = write(dir.path(), "a.cnf", "p cnf 2 2\n1 2 0\n-1 0\n");
    let o = mpdt(&["sat", s(&cnf)]);
    assert_eq!(stdout(&o), "s SATISFIABLE\nv -1 2 0\n");
    let cnf = write(dir.path(), "b.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    assert_eq!(stdout(&mpdt(&["sat", s(&cnf)])), "s UNSATISFIABLE\n");

    let wcnf = write(dir.path(), "a.wcnf", "p wcnf 2 3 3\n3 1 2 0\n1 -1 0\n1 -2 0\n");
    let o = mpdt(&["maxsat", s(&wcnf)]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[lines.len() - 3..lines.len() - 1], ["o 1", "s OPTIMUM FOUND"]);
}

#[test]
fn oracle_command_on_xor() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "x.csv", "a,b,target\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n");
    let o = mpdt(&["oracle", s(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("minimum size 7\n"));
}

#[test]
fn preprocess_then_train_from_bin() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("mux.bin");
    assert_eq!(mpdt(&["preprocess", &data("mux6.csv"), "--out", s(&bin)]).status.code(), Some(0));
    let o = mpdt(&["train", s(&bin), "--resplits", "0", "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("tree size         15"));
}
