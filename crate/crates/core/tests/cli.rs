use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_adt-reduce");

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(args: &[&str], file: &str) {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let want = std::fs::read_to_string(data("golden").join(file)).unwrap();
    assert_eq!(stdout(&o), want, "{args:?}");
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn golden_outputs() {
    golden(&["solve", &path("lists_query.smt2")], "solve_lists_query.out");
    golden(&["analyze", &path("lists_query.smt2")], "analyze_lists.out");
    golden(&["analyze", &path("nat.smt2")], "analyze_nat.out");
    golden(&["emit", &path("lists_query.smt2")], "emit_lists_query.out");
    golden(&["corpus", "--seed", "7", "--signatures", "2", "--formulas", "10"], "corpus_seed7.out");
}

#[test]
fn solve_prints_checked_models_and_statistics() {
    let o = run(&["solve", "--check-model", "--stats", &path("lists_query.smt2")]);
    let out = stdout(&o);
    assert!(out.starts_with("sat\n"), "{out}");
    assert!(out.contains("(define-fun x () CList (cons "), "{out}");
    assert!(out.contains("; nodes: parse 17, reduct "), "{out}");
    let o = run(&["solve", "--no-opt", &path("even_list.smt2")]);
    assert_eq!(stdout(&o), "unsat\n");
}

#[test]
fn emit_uses_reduced_symbols() {
    let out = stdout(&run(&["emit", "--no-opt", &path("lists_query.smt2")]));
    assert!(out.contains("(ctorId_CList x)") && out.contains("(depth_CList x)"), "{out}");
    assert!(out.contains("(ctorId_Colour _t1)"), "{out}");
}

#[test]
fn unknown_carries_the_diagnosis() {
    let o = run(&["solve", "--fuel", "20", &path("nat.smt2")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("unknown\n") && out.contains("NonExpanding(Nat)"), "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--fuel", "many", &path("lists_query.smt2")]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--external-cmd", "z3", &path("lists_query.smt2")]).status.code(), Some(1));
    assert_eq!(run(&["solve", &path("missing.smt2")]).status.code(), Some(2));
    let bad = std::env::temp_dir().join(format!("adt-reduce-bad-{}.smt2", std::process::id()));
    std::fs::write(&bad, "(declare-const x Foo)\n(assert (= x x))\n").unwrap();
    let o = run(&["solve", &bad.to_string_lossy()]);
    std::fs::remove_file(&bad).unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", "--backend", "external", "--external-cmd", "/nonexistent/solver", &path("lists_query.smt2")]);
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(BIN)
        .args(["interpolate", &path("interp_a.smt2"), &path("interp_b.smt2")])
        .env_remove("ADT_REDUCE_INTERP")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn output_is_deterministic() {
    let args = ["corpus", "--seed", "3", "--signatures", "1", "--formulas", "15"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}
