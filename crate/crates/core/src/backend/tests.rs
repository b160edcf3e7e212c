use super::*;
use crate::ast::parse;
use crate::reduce::{reduce_formula, simplify, Mode, ReduceOptions};

const LISTS_QUERY: &str = "(declare-datatypes ((Colour 0) (CList 0))
  (((red) (green) (blue))
   ((nil) (cons (head Colour) (tail CList)))))
(declare-const x CList)
(declare-const y Colour)
(assert (and ((_ is cons) x) (not (= y blue)) (or (= (head x) red) (= x (cons y nil)))))";

fn lists_query(opts: &ReduceOptions) -> ReducedFormula {
    let s = parse(LISTS_QUERY).unwrap();
    reduce_formula(&s.sig, &s.formula(), Mode::Depth, opts).unwrap().1
}

#[test]
fn lists_query_reducts_are_sat() {
    for opts in [ReduceOptions::default(), ReduceOptions::unoptimized()] {
        let r = lists_query(&opts);
        assert!(matches!(solve(&r, &SolverConfig::default()).unwrap(), SolverResult::Sat(_)));
        let s = simplify(&r);
        assert!(matches!(solve(&s, &SolverConfig::default()).unwrap(), SolverResult::Sat(_)));
    }
}

#[test]
fn emitted_script_reparses() {
    let r = lists_query(&ReduceOptions::unoptimized());
    let text = emit_smtlib(&r);
    assert!(text.starts_with("(set-logic QF_UFLIA)"));
    assert!(text.contains("(declare-fun cons (Int Int) Int)"));
    assert!(text.contains("(declare-fun nil () Int)"));
    let (decls, f) = smtlib::parse_script(&text, &r.formula.functions()).unwrap();
    assert_eq!(decls["head"], 1);
    assert_eq!(f, r.formula);
    assert_eq!(emit_smtlib(&r), text);
}

#[test]
fn external_agrees_with_builtin() {
    let cmd = resolve_command(None);
    if !external::available(&cmd) {
        eprintln!("skipping: no external solver");
        return;
    }
    let cfg = SolverConfig {
        backend: BackendKind::External(Some(cmd)),
        ..SolverConfig::default()
    };
    let r = lists_query(&ReduceOptions::unoptimized());
    assert!(matches!(solve(&r, &cfg).unwrap(), SolverResult::Sat(_)));
    let unsat = RFormula::And(vec![
        r.formula.clone(),
        RFormula::eq(ITerm::var("y"), ITerm::app("blue", vec![])),
        RFormula::eq(ITerm::app("ctorId_Colour", vec![ITerm::var("y")]), ITerm::Const(2)),
        RFormula::eq(ITerm::app("head", vec![ITerm::var("x")]), ITerm::var("y")),
    ]);
    assert_eq!(solve_formula(&unsat, &cfg).unwrap(), SolverResult::Unsat);
    assert_eq!(solve_formula(&unsat, &SolverConfig::default()).unwrap(), SolverResult::Unsat);
}

#[test]
fn missing_solver_is_a_spawn_error() {
    let err = external::run("/nonexistent/solver", "", std::time::Duration::from_secs(1)).unwrap_err();
    assert!(matches!(err, SolverError::Spawn(..)));
}
