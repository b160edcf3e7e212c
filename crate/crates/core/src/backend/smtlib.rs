//! SMT-LIB 2.6 (QF_UFLIA) for reducts: script emission, parsing of
//! scripts and terms, and interpretation of solver responses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::ast::{write_symbol, CmpOp};
use crate::reduce::ReducedFormula;
use crate::reduced::{write_rformula, ITerm, Lin, RFormula};
use crate::sexp::{parse_all, Sexp, SexpKind};

use super::{IntModel, SolverError, SolverResult};

/// Declarations of every variable and function of `f`.
pub fn declarations(f: &RFormula) -> String {
    let mut out = String::new();
    for v in f.vars() {
        out.push_str("(declare-fun ");
        write_symbol(&mut out, &v).expect("string write");
        out.push_str(" () Int)\n");
    }
    for (g, arity) in f.functions() {
        out.push_str("(declare-fun ");
        write_symbol(&mut out, &g).expect("string write");
        let args = vec!["Int"; arity].join(" ");
        let _ = writeln!(out, " ({args}) Int)");
    }
    out
}

pub fn term_to_string(f: &RFormula) -> String {
    let mut s = String::new();
    write_rformula(&mut s, f).expect("string write");
    s
}

/// Satisfiability query for `f` with a model request.
pub fn emit_formula(f: &RFormula) -> String {
    format!(
        "(set-logic QF_UFLIA)\n(set-option :produce-models true)\n{}(assert {})\n(check-sat)\n(get-model)\n",
        declarations(f),
        term_to_string(f)
    )
}

pub fn emit_smtlib(reduct: &ReducedFormula) -> String {
    emit_formula(&reduct.formula)
}

/// Reads a QF_UFLIA script: declarations and the conjunction of its
/// assertions. Declared nullary symbols listed in `funs` are read as
/// constant applications, all others as variables.
pub fn parse_script(
    text: &str,
    funs: &BTreeMap<String, usize>,
) -> Result<(BTreeMap<String, usize>, RFormula), String> {
    let items = parse_all(text).map_err(|e| e.to_string())?;
    let mut decls = BTreeMap::new();
    let mut asserts = Vec::new();
    for it in &items {
        match it.head_symbol() {
            Some("declare-fun") => {
                let l = it.as_list().expect("list");
                let (Some(name), Some(args)) = (l.get(1).and_then(Sexp::as_symbol), l.get(2).and_then(Sexp::as_list))
                else {
                    return Err(format!("bad declaration {it}"));
                };
                decls.insert(name.to_string(), args.len());
            }
            Some("declare-const") => {
                let name = it.as_list().and_then(|l| l.get(1)).and_then(Sexp::as_symbol);
                decls.insert(name.ok_or(format!("bad declaration {it}"))?.to_string(), 0);
            }
            Some("assert") => {
                let body = it.as_list().and_then(|l| l.get(1)).ok_or("empty assert")?;
                asserts.push(parse_formula(body, funs)?);
            }
            _ => {}
        }
    }
    Ok((decls, RFormula::and(asserts)))
}

/// Parses a Boolean term; symbols in `funs` are functions, other symbols
/// variables.
pub fn parse_formula(e: &Sexp, funs: &BTreeMap<String, usize>) -> Result<RFormula, String> {
    let e = expand_lets(e, &BTreeMap::new());
    Parser { funs }.formula(&e)
}

fn expand_lets(e: &Sexp, env: &BTreeMap<String, Sexp>) -> Sexp {
    match &e.kind {
        SexpKind::Symbol(s) => env.get(s).cloned().unwrap_or_else(|| e.clone()),
        SexpKind::List(items) if e.head_symbol() == Some("let") && items.len() == 3 => {
            let mut inner = env.clone();
            if let Some(bs) = items[1].as_list() {
                for b in bs {
                    if let Some([n, v]) = b.as_list() {
                        if let Some(n) = n.as_symbol() {
                            inner.insert(n.to_string(), expand_lets(v, env));
                        }
                    }
                }
            }
            expand_lets(&items[2], &inner)
        }
        SexpKind::List(items) => Sexp {
            kind: SexpKind::List(items.iter().map(|x| expand_lets(x, env)).collect()),
            pos: e.pos,
        },
        _ => e.clone(),
    }
}

struct Parser<'a> {
    funs: &'a BTreeMap<String, usize>,
}

/// A term as guarded alternatives, so `ite` on integers can be lifted to
/// the enclosing atom.
type Cases = Vec<(Vec<RFormula>, Lin)>;

impl Parser<'_> {
    fn formula(&self, e: &Sexp) -> Result<RFormula, String> {
        if let Some(s) = e.as_symbol() {
            return match s {
                "true" => Ok(RFormula::True),
                "false" => Ok(RFormula::False),
                _ => Err(format!("unknown Boolean symbol `{s}`")),
            };
        }
        let items = e.as_list().ok_or_else(|| format!("expected formula, found {e}"))?;
        let head = e.head_symbol().ok_or_else(|| format!("expected operator in {e}"))?;
        let args = &items[1..];
        let fs = || args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>, _>>();
        Ok(match head {
            "and" => RFormula::And(fs()?),
            "or" => RFormula::Or(fs()?),
            "not" if args.len() == 1 => RFormula::not(self.formula(&args[0])?),
            "=>" => {
                let mut xs = fs()?;
                let last = xs.pop().ok_or("empty implication")?;
                let mut d: Vec<RFormula> = xs.into_iter().map(RFormula::not).collect();
                d.push(last);
                RFormula::Or(d)
            }
            "ite" if args.len() == 3 => {
                let c = self.formula(&args[0])?;
                RFormula::Or(vec![
                    RFormula::And(vec![c.clone(), self.formula(&args[1])?]),
                    RFormula::And(vec![RFormula::not(c), self.formula(&args[2])?]),
                ])
            }
            "=" if args.len() >= 2 && self.is_boolean(&args[0]) => {
                let xs = fs()?;
                let pairs = xs.windows(2).map(|w| iff(&w[0], &w[1])).collect();
                RFormula::And(pairs)
            }
            "=" | "<=" | "<" | ">=" | ">" | "distinct" => {
                let ts: Vec<Cases> = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                if ts.len() < 2 {
                    return Err(format!("comparison needs two operands: {e}"));
                }
                let mut out = Vec::new();
                if head == "distinct" {
                    for i in 0..ts.len() {
                        for j in i + 1..ts.len() {
                            out.push(RFormula::not(atom(CmpOp::Eq, &ts[i], &ts[j])));
                        }
                    }
                } else {
                    let op = match head {
                        "=" => CmpOp::Eq,
                        "<=" => CmpOp::Le,
                        "<" => CmpOp::Lt,
                        ">=" => CmpOp::Ge,
                        _ => CmpOp::Gt,
                    };
                    for w in ts.windows(2) {
                        out.push(atom(op, &w[0], &w[1]));
                    }
                }
                RFormula::and(out)
            }
            _ => return Err(format!("unsupported Boolean operator `{head}`")),
        })
    }

    fn is_boolean(&self, e: &Sexp) -> bool {
        match e.as_symbol() {
            Some(s) => s == "true" || s == "false",
            None => matches!(
                e.head_symbol(),
                Some("and" | "or" | "not" | "=>" | "<=" | "<" | ">=" | ">" | "distinct")
            ) || (e.head_symbol() == Some("=")
                && e.as_list().is_some_and(|l| l.len() > 1 && self.is_boolean(&l[1]))),
        }
    }

    fn term(&self, e: &Sexp) -> Result<Cases, String> {
        let single = |l: Lin| Ok(vec![(Vec::new(), l)]);
        match &e.kind {
            SexpKind::Numeral(n) => single(Lin::constant(n.parse().map_err(|_| format!("numeral {n}"))?)),
            SexpKind::Symbol(s) => {
                if self.funs.contains_key(s.as_str()) {
                    single(Lin::term(ITerm::app(s, Vec::new())))
                } else {
                    single(Lin::var(s))
                }
            }
            SexpKind::List(items) => {
                let head = e.head_symbol().ok_or_else(|| format!("expected operator in {e}"))?;
                let args: Vec<Cases> = items[1..].iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                match head {
                    "+" => Ok(combine(&args, |ls| sum(ls.iter().map(|l| (1, (*l).clone())).collect()))),
                    "-" if args.len() == 1 => Ok(combine(&args, |ls| scale(ls[0], -1))),
                    "-" => Ok(combine(&args, |ls| {
                        let mut parts = vec![(1, ls[0].clone())];
                        parts.extend(ls[1..].iter().map(|l| (-1, (*l).clone())));
                        sum(parts)
                    })),
                    "*" => {
                        let mut bad = false;
                        let out = combine(&args, |ls| {
                            let mut k = 1i64;
                            let mut rest: Option<Lin> = None;
                            for l in ls {
                                match l.is_constant() {
                                    Some(c) => k *= c,
                                    None if rest.is_none() => rest = Some((*l).clone()),
                                    None => bad = true,
                                }
                            }
                            scale(&rest.unwrap_or(Lin::constant(1)), k)
                        });
                        if bad {
                            Err(format!("non-linear product {e}"))
                        } else {
                            Ok(out)
                        }
                    }
                    "ite" if items.len() == 4 => {
                        let c = self.formula(&items[1])?;
                        let mut out = Vec::new();
                        for (g, l) in self.term(&items[2])? {
                            let mut g = g;
                            g.push(c.clone());
                            out.push((g, l));
                        }
                        for (g, l) in self.term(&items[3])? {
                            let mut g = g;
                            g.push(RFormula::not(c.clone()));
                            out.push((g, l));
                        }
                        Ok(out)
                    }
                    f => {
                        let mut bad = None;
                        let out = combine(&args, |ls| {
                            let ts: Vec<ITerm> = ls
                                .iter()
                                .map(|l| lin_as_term(l).unwrap_or_else(|| {
                                    bad = Some(l.to_string());
                                    ITerm::Const(0)
                                }))
                                .collect();
                            Lin::term(ITerm::app(f, ts))
                        });
                        match bad {
                            Some(b) => Err(format!("arithmetic argument `{b}` to `{f}` is not supported")),
                            None => Ok(out),
                        }
                    }
                }
            }
            _ => Err(format!("unexpected {e}")),
        }
    }
}

fn iff(a: &RFormula, b: &RFormula) -> RFormula {
    RFormula::Or(vec![
        RFormula::And(vec![a.clone(), b.clone()]),
        RFormula::And(vec![RFormula::not(a.clone()), RFormula::not(b.clone())]),
    ])
}

fn atom(op: CmpOp, a: &Cases, b: &Cases) -> RFormula {
    let mut out = Vec::new();
    for (ga, la) in a {
        for (gb, lb) in b {
            let mut conj: Vec<RFormula> = ga.iter().chain(gb).cloned().collect();
            conj.push(RFormula::cmp(op, la.clone(), lb.clone()));
            out.push(RFormula::and(conj));
        }
    }
    RFormula::or(out)
}

/// Applies `f` to every combination of alternatives.
fn combine(args: &[Cases], mut f: impl FnMut(&[&Lin]) -> Lin) -> Cases {
    let mut acc: Vec<(Vec<RFormula>, Vec<&Lin>)> = vec![(Vec::new(), Vec::new())];
    for a in args {
        let mut next = Vec::new();
        for (g, ls) in &acc {
            for (ga, la) in a {
                let mut g2 = g.clone();
                g2.extend(ga.iter().cloned());
                let mut ls2 = ls.clone();
                ls2.push(la);
                next.push((g2, ls2));
            }
        }
        acc = next;
    }
    acc.into_iter().map(|(g, ls)| (g, f(&ls))).collect()
}

fn scale(l: &Lin, k: i64) -> Lin {
    Lin::sum(l.terms.iter().map(|(c, t)| (c * k, t.clone())).collect(), l.constant * k)
}

fn sum(parts: Vec<(i64, Lin)>) -> Lin {
    let mut out = Lin::constant(0);
    for (k, l) in parts {
        let s = scale(&l, k);
        out.terms.extend(s.terms);
        out.constant += s.constant;
    }
    out
}

fn lin_as_term(l: &Lin) -> Option<ITerm> {
    match (l.terms.as_slice(), l.constant) {
        ([], c) => Some(ITerm::Const(c)),
        ([(1, t)], 0) => Some(t.clone()),
        _ => None,
    }
}

// ---- responses ----

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i128),
    Bool(bool),
}

/// `define-fun` bodies of a model response.
struct Defs {
    funs: BTreeMap<String, (Vec<String>, Sexp)>,
}

impl Defs {
    fn from_model(model: &Sexp) -> Result<Defs, String> {
        let items = model.as_list().ok_or("model is not a list")?;
        let mut funs = BTreeMap::new();
        for d in items {
            if d.as_symbol() == Some("model") {
                continue;
            }
            if d.head_symbol() != Some("define-fun") {
                continue;
            }
            let l = d.as_list().expect("list");
            if l.len() != 5 {
                return Err(format!("malformed definition {d}"));
            }
            let name = l[1].as_symbol().ok_or("definition name")?.to_string();
            let params = l[2]
                .as_list()
                .ok_or("parameter list")?
                .iter()
                .map(|p| {
                    p.as_list()
                        .and_then(|pl| pl.first())
                        .and_then(Sexp::as_symbol)
                        .map(str::to_string)
                        .ok_or_else(|| format!("parameter {p}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            funs.insert(name, (params, l[4].clone()));
        }
        Ok(Defs { funs })
    }

    fn call(&self, f: &str, args: &[i128], depth: usize) -> Result<i128, String> {
        let Some((params, body)) = self.funs.get(f) else { return Ok(0) };
        let env: BTreeMap<String, Value> = params.iter().cloned().zip(args.iter().map(|a| Value::Int(*a))).collect();
        match self.eval(body, &env, depth + 1)? {
            Value::Int(v) => Ok(v),
            Value::Bool(_) => Err(format!("`{f}` is not integer-valued")),
        }
    }

    fn eval(&self, e: &Sexp, env: &BTreeMap<String, Value>, depth: usize) -> Result<Value, String> {
        if depth > 500 {
            return Err("model definitions nest too deeply".into());
        }
        let int = |v: Value| match v {
            Value::Int(i) => Ok(i),
            Value::Bool(_) => Err(format!("expected integer in {e}")),
        };
        let boolean = |v: Value| match v {
            Value::Bool(b) => Ok(b),
            Value::Int(_) => Err(format!("expected Boolean in {e}")),
        };
        match &e.kind {
            SexpKind::Numeral(n) => n.parse().map(Value::Int).map_err(|_| format!("numeral {n}")),
            SexpKind::Symbol(s) => match s.as_str() {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                _ => match env.get(s) {
                    Some(v) => Ok(v.clone()),
                    None => self.call(s, &[], depth).map(Value::Int),
                },
            },
            SexpKind::List(items) => {
                let head = e.head_symbol().ok_or_else(|| format!("cannot evaluate {e}"))?;
                let args = &items[1..];
                if head == "let" && args.len() == 2 {
                    let mut inner = env.clone();
                    for b in args[0].as_list().ok_or("let bindings")? {
                        let [n, v] = b.as_list().ok_or("let binding")? else {
                            return Err(format!("let binding {b}"));
                        };
                        inner.insert(n.as_symbol().ok_or("let name")?.to_string(), self.eval(v, env, depth + 1)?);
                    }
                    return self.eval(&args[1], &inner, depth + 1);
                }
                if head == "ite" && args.len() == 3 {
                    let c = boolean(self.eval(&args[0], env, depth + 1)?)?;
                    return self.eval(&args[if c { 1 } else { 2 }], env, depth + 1);
                }
                let vals: Vec<Value> = args
                    .iter()
                    .map(|a| self.eval(a, env, depth + 1))
                    .collect::<Result<_, _>>()?;
                let ints = || vals.iter().cloned().map(int).collect::<Result<Vec<i128>, _>>();
                let bools = || vals.iter().cloned().map(boolean).collect::<Result<Vec<bool>, _>>();
                Ok(match head {
                    "and" => Value::Bool(bools()?.iter().all(|b| *b)),
                    "or" => Value::Bool(bools()?.iter().any(|b| *b)),
                    "not" => Value::Bool(!bools()?[0]),
                    "=>" => {
                        let b = bools()?;
                        Value::Bool(!b[0] || b[1])
                    }
                    "=" => Value::Bool(vals.windows(2).all(|w| w[0] == w[1])),
                    "distinct" => Value::Bool(vals.windows(2).all(|w| w[0] != w[1])),
                    "<=" | "<" | ">=" | ">" => {
                        let v = ints()?;
                        let op = match head {
                            "<=" => CmpOp::Le,
                            "<" => CmpOp::Lt,
                            ">=" => CmpOp::Ge,
                            _ => CmpOp::Gt,
                        };
                        Value::Bool(v.windows(2).all(|w| op.holds(w[0], w[1])))
                    }
                    "+" => Value::Int(ints()?.iter().sum()),
                    "*" => Value::Int(ints()?.iter().product()),
                    "-" => {
                        let v = ints()?;
                        match v.as_slice() {
                            [x] => Value::Int(-x),
                            [x, rest @ ..] => Value::Int(x - rest.iter().sum::<i128>()),
                            [] => return Err("empty subtraction".into()),
                        }
                    }
                    "div" | "mod" => {
                        let v = ints()?;
                        if v.len() != 2 || v[1] == 0 {
                            return Err(format!("cannot evaluate {e}"));
                        }
                        Value::Int(if head == "div" {
                            v[0].div_euclid(v[1])
                        } else {
                            v[0].rem_euclid(v[1])
                        })
                    }
                    "abs" => Value::Int(ints()?[0].abs()),
                    f => Value::Int(self.call(f, &ints()?, depth)?),
                })
            }
            _ => Err(format!("cannot evaluate {e}")),
        }
    }
}

/// Interprets a solver's reply to [`emit_formula`] for `f`. Function
/// definitions are sampled at the argument tuples that occur in `f`.
pub fn parse_response(text: &str, f: &RFormula) -> Result<SolverResult, SolverError> {
    let protocol = || SolverError::Protocol(text.trim().to_string());
    let items = parse_all(text).map_err(|_| protocol())?;
    let Some(first) = items.iter().find(|i| i.as_symbol().is_some() || i.head_symbol() == Some("error")) else {
        return Err(protocol());
    };
    match first.as_symbol() {
        Some("unsat") => return Ok(SolverResult::Unsat),
        Some("unknown") => return Ok(SolverResult::Unknown("external solver returned unknown".into())),
        Some("sat") => {}
        _ => return Err(protocol()),
    }
    let model = items
        .iter()
        .skip_while(|i| i.as_symbol() != Some("sat"))
        .nth(1)
        .ok_or_else(protocol)?;
    if model.head_symbol() == Some("error") {
        return Err(protocol());
    }
    let defs = Defs::from_model(model).map_err(|_| protocol())?;
    model_from_defs(&defs, f).map(SolverResult::Sat).map_err(SolverError::Protocol)
}

fn model_from_defs(defs: &Defs, f: &RFormula) -> Result<IntModel, String> {
    let mut m = IntModel::default();
    let narrow = |v: i128| i64::try_from(v).map_err(|_| format!("model value {v} exceeds 64 bits"));
    for v in f.vars() {
        let val = defs.call(&v, &[], 0)?;
        m.vars.insert(v, narrow(val)?);
    }
    let mut apps = Vec::new();
    f.visit_atoms(&mut |_, a, b| {
        for (_, t) in a.terms.iter().chain(&b.terms) {
            t.visit_apps(&mut |app| apps.push(app.clone()));
        }
    });
    for app in apps {
        let ITerm::App(g, args) = &app else { continue };
        let vals: Vec<i64> = args.iter().map(|a| m.term(a)).collect();
        let wide: Vec<i128> = vals.iter().map(|v| *v as i128).collect();
        let r = narrow(defs.call(g, &wide, 0)?)?;
        m.funs.entry(g.clone()).or_default().insert(vals, r);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RFormula {
        RFormula::And(vec![
            RFormula::eq(ITerm::app("f", vec![ITerm::var("a")]), ITerm::var("b")),
            RFormula::eq(ITerm::app("nil", vec![]), ITerm::var("a")),
            RFormula::cmp(CmpOp::Lt, Lin::var("b"), Lin::constant(-3)),
        ])
    }

    #[test]
    fn script_round_trip() {
        let f = sample();
        let text = emit_formula(&f);
        assert!(text.contains("(declare-fun f (Int) Int)"));
        assert!(text.contains("(declare-fun nil () Int)"));
        let (decls, g) = parse_script(&text, &f.functions()).unwrap();
        assert_eq!(decls["f"], 1);
        assert_eq!(g, f);
    }

    #[test]
    fn model_response_is_sampled() {
        let f = sample();
        let reply = "sat\n(\n  (define-fun a () Int 2)\n  (define-fun b () Int (- 5))\n  \
                     (define-fun nil () Int 2)\n  (define-fun f ((x!0 Int)) Int (ite (= x!0 2) (- 5) 0))\n)\n";
        let SolverResult::Sat(m) = parse_response(reply, &f).unwrap() else { panic!() };
        assert_eq!(m.apply("f", &[2]), -5);
        assert!(m.eval(&f));
    }

    #[test]
    fn malformed_reply_is_a_protocol_error() {
        let err = parse_response("(error \"line 1: unknown command\")", &sample()).unwrap_err();
        assert!(matches!(err, SolverError::Protocol(raw) if raw.contains("unknown command")));
        assert_eq!(parse_response("unsat\n", &sample()).unwrap(), SolverResult::Unsat);
    }

    #[test]
    fn ite_and_let_are_lifted() {
        let decls = BTreeMap::new();
        let e = &parse_all("(let ((t (ite (> a 0) a (- a)))) (>= t 1))").unwrap()[0];
        let f = parse_formula(e, &decls).unwrap();
        let mut m = IntModel::default();
        for (a, expect) in [(3, true), (-2, true), (0, false)] {
            m.vars.insert("a".into(), a);
            assert_eq!(m.eval(&f), expect, "a = {a}");
        }
    }
}
