use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ocus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocus")).args(args).env_remove("OCUS_TIMEOUT_MS").output().unwrap()
}

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn running_example_subset() {
    let o = ocus(&["ocus", "--problem", &data("tests/data/example1.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("subset: c1 c2 c5 c7"), "{out}");
    assert!(out.contains("cost: 122"), "{out}");
}

#[test]
fn trace_lines_are_json() {
    let o = ocus(&["ocus", "--problem", &data("tests/data/example1.json"), "--trace", "--grow", "model"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let records: Vec<serde_json::Value> =
        out.lines().filter(|l| l.starts_with('{')).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!records.is_empty());
    assert_eq!(records.last().unwrap()["verdict"], "unsat");
    assert!(out.contains("cost: 122"));
}

#[test]
fn satisfiable_dimacs_has_no_subset() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("sat.cnf");
    std::fs::write(&cnf, "p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    let o = ocus(&["ocus", "--formula", path(&cnf)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no unsatisfiable subset"));
}

#[test]
fn dimacs_with_weights_and_domain() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("unsat.cnf");
    std::fs::write(&cnf, "p cnf 1 3\n1 0\n-1 0\n-1 0\n").unwrap();
    let o = ocus(&["ocus", "--formula", path(&cnf), "--weights", "1,5,2", "--exactly-one", "2,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("subset: c1 c3"));
    assert!(stdout(&o).contains("cost: 3"));
    let o = ocus(&["ocus", "--formula", path(&cnf), "--exactly-one", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let ex = data("tests/data/example1.json");
    assert_eq!(ocus(&["ocus", "--problem", &ex, "--grow", "sideways"]).status.code(), Some(2));
    assert_eq!(ocus(&["ocus", "--problem", &ex, "--grow-weights", "heavy"]).status.code(), Some(2));
    assert_eq!(ocus(&["ocus"]).status.code(), Some(2));
    assert_eq!(ocus(&["ocus", "--problem", "/nonexistent.json"]).status.code(), Some(2));
    let o = ocus(&["explain", "--problem", &ex, "--algo", "ocus", "--incr", "perlit"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid configuration"), "{}", stderr(&o));
}

#[test]
fn explain_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let puzzle = data("puzzles/pets-3x3.json");
    let seq = dir.path().join("seq.json");
    let o = ocus(&["explain", "--problem", &puzzle, "--incr", "shared", "--out", path(&seq)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&seq).unwrap()).unwrap();
    assert_eq!(doc["total_cost"], 1878);
    let o = ocus(&["verify", "--problem", &puzzle, "--sequence", path(&seq)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("valid:"));

    // A tampered total no longer verifies.
    let mut doc = doc;
    doc["total_cost"] = serde_json::json!(1);
    std::fs::write(&seq, serde_json::to_vec(&doc).unwrap()).unwrap();
    assert_eq!(ocus(&["verify", "--problem", &puzzle, "--sequence", path(&seq)]).status.code(), Some(1));
}

#[test]
fn mus_sequence_costs_at_least_ocus() {
    let puzzle = data("puzzles/pets-2x2.json");
    let total = |args: &[&str]| {
        let mut all = vec!["explain", "--problem", puzzle.as_str()];
        all.extend_from_slice(args);
        let o = ocus(&all);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        doc["total_cost"].as_u64().unwrap()
    };
    assert!(total(&["--algo", "mus"]) >= total(&["--algo", "ocus"]));
}

#[test]
fn explain_times_out() {
    let o = Command::new(env!("CARGO_BIN_EXE_ocus"))
        .args(["explain", "--problem", &data("puzzles/houses-4x4.json"), "--grow", "none"])
        .env("OCUS_TIMEOUT_MS", "200")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn encode_writes_problem_and_dimacs() {
    let puzzle = data("puzzles/pets-2x2.json");
    let o = ocus(&["encode", "--puzzle", &puzzle]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["clauses"].as_array().is_some_and(|c| !c.is_empty()));
    let o = ocus(&["encode", "--puzzle", &puzzle, "--dimacs"]);
    assert!(stdout(&o).lines().any(|l| l.starts_with("p cnf ")));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(data("puzzles/pets-2x2.json"), dir.path().join("pets-2x2.json")).unwrap();
    let out = dir.path().join("runs.csv");
    let o = ocus(&[
        "bench",
        "--problems",
        path(dir.path()),
        "--matrix",
        "mus,ocus+shared@max:actual:unif",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,config,step,cost,cum_ms,explained"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|r| r.starts_with("pets-2x2,mus,1,")), "{text}");
    assert!(rows.iter().any(|r| r.starts_with("pets-2x2,ocus+shared@max:actual:unif,")), "{text}");
}

#[test]
fn bench_rejects_bad_input() {
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(ocus(&["bench", "--problems", path(empty.path())]).status.code(), Some(2));
    assert_eq!(ocus(&["bench", "--problems", "/nonexistent-dir"]).status.code(), Some(2));
    std::fs::copy(data("puzzles/pets-2x2.json"), empty.path().join("p.json")).unwrap();
    let o = ocus(&["bench", "--problems", path(empty.path()), "--matrix", "ocus@upward"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("valid labels"));
}
