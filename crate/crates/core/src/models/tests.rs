use super::*;
use crate::ast::{parse, Script};
use crate::backend::{solve, SolverConfig, SolverResult};
use crate::reduce::{reduce_formula, Mode, ReduceOptions};

const LISTS: &str = "(declare-datatypes ((Colour 0) (CList 0))
  (((red) (green) (blue))
   ((nil) (cons (head Colour) (tail CList)))))
(declare-const x CList)
(declare-const z CList)
(declare-const y Colour)
(declare-const u Colour)
(declare-const v Colour)
";

fn script(body: &str) -> Script {
    parse(&format!("{LISTS}{body}")).unwrap()
}

fn round_trip(s: &Script, mode: Mode, opts: &ReduceOptions) -> AdtModel {
    let f = s.formula();
    let (flat, r) = reduce_formula(&s.sig, &f, mode, opts).unwrap();
    let SolverResult::Sat(m) = solve(&r, &SolverConfig::default()).unwrap() else {
        panic!("expected sat");
    };
    let model = reconstruct(&s.sig, &flat, &r, &m).unwrap();
    let check = check_model(&s.sig, &model, &f).unwrap();
    assert!(check.holds, "{:?}", check.diagnostic);
    model
}

fn all_options() -> Vec<ReduceOptions> {
    vec![
        ReduceOptions::default(),
        ReduceOptions::unoptimized(),
        ReduceOptions {
            enum_opt: false,
            ..ReduceOptions::default()
        },
    ]
}

fn term(s: &Script, name: &str, args: Vec<Term>) -> Term {
    Term::Ctor(s.sig.ctor_id(name).unwrap(), args)
}

#[test]
fn lists_query_round_trip() {
    let s = script(
        "(assert (and ((_ is cons) x) (not (= y blue)) (or (= (head x) red) (= x (cons y nil)))))",
    );
    for opts in all_options() {
        for mode in [Mode::Depth, Mode::Size] {
            let model = round_trip(&s, mode, &opts);
            assert_eq!(model.adt["x"].head(), s.sig.ctor_id("cons"));
        }
    }
}

#[test]
fn disequal_lists_get_distinct_terms() {
    let s = script("(assert (not (= x z)))");
    let (flat, r) = reduce_formula(&s.sig, &s.formula(), Mode::Depth, &ReduceOptions::default()).unwrap();
    let mut m = IntModel::default();
    m.vars.insert("x".into(), 0);
    m.vars.insert("z".into(), 1);
    let model = reconstruct(&s.sig, &flat, &r, &m).unwrap();
    let nil = term(&s, "nil", vec![]);
    let red_nil = term(&s, "cons", vec![term(&s, "red", vec![]), nil.clone()]);
    assert_eq!(model.adt["x"], nil);
    assert_eq!(model.adt["z"], red_nil);
}

#[test]
fn three_distinct_colours_form_a_bijection() {
    let s = script("(assert (and (not (= y u)) (not (= y v)) (not (= u v))))");
    for opts in all_options() {
        let model = round_trip(&s, Mode::Depth, &opts);
        let image: BTreeSet<&Term> = ["y", "u", "v"].iter().map(|n| &model.adt[*n]).collect();
        assert_eq!(image.len(), 3);
    }
}

#[test]
fn wrong_headed_selectors_are_overridden() {
    let s = script("(assert (and (= x nil) (= (head x) blue) (= (head z) y) (not (= y red)) ((_ is nil) z)))");
    for opts in all_options() {
        let model = round_trip(&s, Mode::Depth, &opts);
        assert!(!model.selector_overrides.is_empty());
    }
}

#[test]
fn nested_constructors_and_cycles() {
    let s = script(
        "(assert (and (= x (cons y (cons u z))) (not (= (tail x) z)) (= (tail (tail x)) z) ((_ is cons) z)))",
    );
    for opts in all_options() {
        for mode in [Mode::Depth, Mode::Size] {
            round_trip(&s, mode, &opts);
        }
    }
}

#[test]
fn fresh_pairs_are_reported() {
    let s = script("(assert (not (= x z)))");
    let (flat, r) = reduce_formula(&s.sig, &s.formula(), Mode::Depth, &ReduceOptions::default()).unwrap();
    let SolverResult::Sat(m) = solve(&r, &SolverConfig::default()).unwrap() else {
        panic!("expected sat");
    };
    let rec = reconstruct_traced(&s.sig, &flat, &r, &m).unwrap();
    assert_eq!(rec.fresh_vars(), vec!["x", "z"]);
    assert!(rec.state.d.is_empty());
}

#[test]
fn check_model_examples() {
    let s = script("(assert ((_ is cons) x))");
    let nil = term(&s, "nil", vec![]);
    let model = AdtModel::new().with_adt("x", nil.clone());
    let c = check_model(&s.sig, &model, &s.formula()).unwrap();
    assert!(!c.holds);
    assert_eq!(c.diagnostic.as_deref(), Some("((_ is cons) x)"));

    let s = script("(assert (= (adt.size x) 3))");
    let blue_nil = term(&s, "cons", vec![term(&s, "blue", vec![]), nil]);
    let model = AdtModel::new().with_adt("x", blue_nil);
    assert!(check_model(&s.sig, &model, &s.formula()).unwrap().holds);

    let s = script("(assert (and (= x z) ((_ is nil) x)))");
    let model = AdtModel::new().with_adt("x", term(&s, "nil", vec![]));
    assert_eq!(
        check_model(&s.sig, &model, &s.formula()),
        Err(EvalError::UnboundVariable("z".into()))
    );
}
