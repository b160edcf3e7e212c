use super::*;
use crate::ast::{parse, Script};

const LISTS: &str = "(declare-datatypes ((Colour 0) (CList 0))
  (((red) (green) (blue))
   ((nil) (cons (head Colour) (tail CList)))))
(declare-const x CList)
(declare-const z CList)
(declare-const y Colour)
(declare-const n Int)
";

fn script(body: &str) -> Script {
    parse(&format!("{LISTS}{body}")).unwrap()
}

fn lists_query() -> Script {
    script("(assert (and ((_ is cons) x) (not (= y blue)) (or (= (head x) red) (= x (cons y nil)))))")
}

fn red(s: &Script, mode: Mode, opts: &ReduceOptions) -> ReducedFormula {
    reduce_formula(&s.sig, &s.formula(), mode, opts).unwrap().1
}

#[test]
fn unoptimized_reduct_structure() {
    let s = lists_query();
    let r = red(&s, Mode::Depth, &ReduceOptions::unoptimized());
    let text = r.formula.to_string();
    for needle in [
        "(= (cons _s1 _s2) x)",
        "(= (ctorId_CList x) 1)",
        "(= (head x) _s1)",
        "(= (tail x) _s2)",
        "(> (depth_CList x) (depth_Colour _s1))",
        "(> (depth_CList x) (depth_CList _s2))",
        "(= (ctorId_Colour _t1) 2)",
        "(<= 0 y)",
        "(< y 3)",
        "(= (nil) x)",
        "(= (ctorId_CList x) 0)",
    ] {
        let needle = needle.replace("(nil)", "nil");
        assert!(text.contains(&needle), "missing {needle} in {text}");
    }
    // the unguarded selector keeps its case split
    assert!(text.contains("(or (and (= nil x)"));
    assert!(r.table.vars.values().any(|v| v.origin == VarOrigin::Skolem));
}

#[test]
fn optimizations_drop_case_split_and_skolems() {
    let s = lists_query();
    let r = simplify(&red(&s, Mode::Depth, &ReduceOptions::default()));
    let text = r.formula.to_string();
    assert!(!text.contains("(= nil x)"), "{text}");
    assert!(!text.contains("_s3"), "{text}");
    assert!(text.contains("(= (head x) 0)"), "{text}");
    assert!(!text.contains("ctorId_Colour"), "{text}");
}

#[test]
fn enum_constants_and_testers() {
    let s = script("(assert (and (= y red) ((_ is blue) y)))");
    let r = red(&s, Mode::Depth, &ReduceOptions::default());
    let text = r.formula.to_string();
    assert!(text.contains("(= 0 y)") || text.contains("(= y 0)"), "{text}");
    assert!(text.contains("(= 2 y)") || text.contains("(= y 2)"), "{text}");
    assert!(r.table.funs.keys().all(|f| !f.contains("Colour")));
    // the list sort is not an enumeration and keeps its symbols
    let s = script("(assert ((_ is nil) x))");
    let r = red(&s, Mode::Depth, &ReduceOptions::default());
    assert!(r.formula.to_string().contains("(= nil x)"));
}

#[test]
fn size_atom_in_depth_mode_is_rejected() {
    let s = script("(assert (= (adt.size x) n))");
    let err = reduce_formula(&s.sig, &s.formula(), Mode::Depth, &ReduceOptions::default()).unwrap_err();
    assert_eq!(err, ReduceError::ModeMismatch("x".into()));
}

#[test]
fn size_rule_adds_image_membership() {
    let s = script("(assert (= (adt.size x) n))");
    let r = red(&s, Mode::Size, &ReduceOptions::default());
    let text = r.formula.to_string();
    assert!(text.contains("(= (size_CList x) _t1)"), "{text}");
    assert!(text.contains("(= _t1 (+ (* 2 _k1) 1))"), "{text}");
}

#[test]
fn depth_mode_is_utvpi() {
    let s = lists_query();
    for opts in [ReduceOptions::default(), ReduceOptions::unoptimized()] {
        check_utvpi(&red(&s, Mode::Depth, &opts).formula).unwrap();
    }
}

#[test]
fn simplify_detects_contradiction_and_is_idempotent() {
    let s = script("(assert (and (= y red) (= z x) (not (= y red))))");
    let r = red(&s, Mode::Depth, &ReduceOptions::default());
    assert_eq!(simplify(&r).formula, RFormula::False);

    let s = lists_query();
    let once = simplify(&red(&s, Mode::Depth, &ReduceOptions::default()));
    assert_eq!(simplify(&once), once);
}

#[test]
fn skeleton_follows_flat_structure() {
    let s = script("(assert (or (and (= x z) (not (= y green))) (= x nil)))");
    let (_, r) = reduce_formula(&s.sig, &s.formula(), Mode::Depth, &ReduceOptions::unoptimized()).unwrap();
    let sk = r.formula.skeleton();
    assert!(sk.starts_with("&(|(&("), "{sk}");
}
