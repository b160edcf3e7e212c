use super::*;
use crate::ast::{parse, Script, Term};
use crate::oracle::{bounded_search, OracleConfig, OracleVerdict};

const LISTS: &str = "(declare-datatypes ((Colour 0) (CList 0))
  (((red) (green) (blue))
   ((nil) (cons (head Colour) (tail CList)))))
(declare-const x CList)
(declare-const k Int)
";

const NAT: &str = "(declare-datatypes ((Nat 0)) (((one) (succ (pred Nat)))))
(declare-const x Nat)
(declare-const y Nat)
";

fn script(prelude: &str, body: &str) -> Script {
    parse(&format!("{prelude}{body}")).unwrap()
}

fn run(s: &Script, fuel: usize) -> SizeOutcome {
    let cfg = SizeSolveConfig {
        fuel,
        ..SizeSolveConfig::default()
    };
    solve_with_size(&s.sig, &s.formula(), &cfg).unwrap()
}

#[test]
fn unfolding_adds_constructor_cases() {
    let s = script(NAT, "(assert (not (= x y)))");
    let st = UnfoldState::new(&s.sig, &s.formula(), 10);
    let st = unfold_step(&s.sig, &st, "x").unwrap();
    let text = st.flat.display(&s.sig).to_string();
    assert!(text.contains("(or (= one x) (= (succ _u1) x))"), "{text}");
    assert_eq!(st.unfolded, vec!["x".to_string()]);
    assert_eq!(st.root_of("_u1"), "x");
    assert_eq!(
        unfold_step(&s.sig, &st, "x").unwrap_err(),
        UnfoldError::AlreadyUnfolded("x".into())
    );
    assert_eq!(
        unfold_step(&s.sig, &st, "nope").unwrap_err(),
        UnfoldError::UnknownVariable("nope".into())
    );

    let s = script(LISTS, "(assert ((_ is cons) x))");
    let st = UnfoldState::new(&s.sig, &s.formula(), 10);
    let st = unfold_step(&s.sig, &st, "x").unwrap();
    let text = st.flat.display(&s.sig).to_string();
    assert!(text.contains("(or (= nil x) (= (cons _u1 _u2) x))"), "{text}");
    assert_eq!(st.flat.vars["_u1"], VarSort::Adt(s.sig.sort_id("Colour").unwrap()));
}

#[test]
fn blue_singleton_list() {
    let s = script(
        LISTS,
        "(assert (and (= (adt.size x) 3) (not (= (head x) red)) (not (= (head x) green))))",
    );
    let out = run(&s, DEFAULT_FUEL);
    let SizeVerdict::Sat(m) = out.verdict else { panic!("{:?}", out.verdict) };
    // independent oracle: the only model among lists of size <= 3
    let c = |n| s.sig.ctor_id(n).unwrap();
    let expected = Term::Ctor(c("cons"), vec![Term::Ctor(c("blue"), vec![]), Term::Ctor(c("nil"), vec![])]);
    let cfg = OracleConfig {
        max_size: 3,
        ..OracleConfig::default()
    };
    let vars = vec![("x".to_string(), s.var_sort("x").unwrap())];
    let OracleVerdict::Model(o) = bounded_search(&s.sig, &vars, &s.formula(), &cfg).unwrap() else {
        panic!()
    };
    assert_eq!(o.adt["x"], expected);
    assert_eq!(m.adt["x"], expected);
}

#[test]
fn even_list_size_is_refuted_without_unfolding() {
    let s = script(LISTS, "(assert (= (adt.size x) (* 2 k)))");
    let out = run(&s, DEFAULT_FUEL);
    assert_eq!(out.verdict, SizeVerdict::Unsat);
    assert_eq!(out.rounds, 0);
}

#[test]
fn bounded_nat_disequality_is_refuted() {
    let s = script(
        NAT,
        "(assert (and (not (= x y)) (= (adt.size x) (adt.size y)) (<= (adt.size x) 3)))",
    );
    let out = run(&s, DEFAULT_FUEL);
    assert_eq!(out.verdict, SizeVerdict::Unsat);
    assert!(out.unfoldings.values().all(|&n| n <= 3), "{:?}", out.unfoldings);
    let cfg = OracleConfig {
        max_size: 3,
        ..OracleConfig::default()
    };
    assert_eq!(bounded_search(&s.sig, &s.vars, &s.formula(), &cfg).unwrap(), OracleVerdict::NoModel);
}

#[test]
fn unbounded_nat_disequality_runs_out_of_fuel() {
    let s = script(NAT, "(assert (and (not (= x y)) (= (adt.size x) (adt.size y))))");
    let out = run(&s, 20);
    let SizeVerdict::Unknown(why) = out.verdict else { panic!("{:?}", out.verdict) };
    assert!(why.contains("NonExpanding(Nat)"), "{why}");
    assert_eq!(out.rounds, 20);
}

#[test]
fn satisfiable_nat_constraints() {
    let s = script(NAT, "(assert (and (not (= x y)) (= (adt.size x) (+ (adt.size y) 2))))");
    let out = run(&s, DEFAULT_FUEL);
    let SizeVerdict::Sat(m) = out.verdict else { panic!("{:?}", out.verdict) };
    assert!(check_model(&s.sig, &m, &s.formula()).unwrap().holds);
}

#[test]
fn completeness_reports() {
    let lists = script(LISTS, "");
    assert!(completeness_report(&lists.sig).starts_with("decision procedure complete"));
    let nat = script(NAT, "");
    let r = completeness_report(&nat.sig);
    assert!(r.contains("incomplete") && r.contains("Nat: non-expanding (cycle: Nat -> succ -> Nat)"), "{r}");
    let mixed = parse(
        "(declare-datatypes ((Colour 0) (CList 0) (Nat 0))
          (((red) (green) (blue)) ((nil) (cons (head Colour) (tail CList))) ((one) (succ (pred Nat)))))",
    )
    .unwrap();
    let r = completeness_report(&mixed.sig);
    assert!(r.contains("Nat: non-expanding"), "{r}");
    assert!(!r.contains("CList") && !r.contains("Colour:"), "{r}");
}
