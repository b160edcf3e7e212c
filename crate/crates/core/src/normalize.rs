//! Negation normal form and flattening.
//!
//! A flat formula mentions constructors and selectors only in positive
//! literals `g(x1, ..., xn) = x0` over variables, and sizes only as
//! `|x| = y` with `y` an integer variable. Every distinct non-variable
//! subterm is named by one fresh variable `_t<N>`; the naming literal is
//! conjoined in the innermost disjunct that uses it, and reused by every
//! literal below that disjunct.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::ast::{CmpOp, Formula, IntExpr, Term, VarSort};
use crate::signature::{CtorId, Signature};

/// Negation normal form: implications eliminated, negations only on atoms.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, true)
}

fn nnf(f: &Formula, pos: bool) -> Formula {
    match f {
        Formula::True => {
            if pos {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::False => {
            if pos {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::Tester(..) | Formula::Eq(..) | Formula::IntCmp(..) => {
            if pos {
                f.clone()
            } else {
                Formula::not(f.clone())
            }
        }
        Formula::Not(x) => nnf(x, !pos),
        Formula::And(xs) | Formula::Or(xs) => {
            let is_and = matches!(f, Formula::And(_)) == pos;
            let children = xs.iter().map(|x| nnf(x, pos)).collect();
            if is_and {
                Formula::And(children)
            } else {
                Formula::Or(children)
            }
        }
        Formula::Implies(a, b) => {
            if pos {
                Formula::Or(vec![nnf(a, false), nnf(b, true)])
            } else {
                Formula::And(vec![nnf(a, true), nnf(b, false)])
            }
        }
    }
}

/// `sum coeffs[v] * v + constant`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<String, i64>,
    pub constant: i64,
}

impl LinExpr {
    fn add_scaled(&mut self, other: &LinExpr, k: i64) {
        for (v, c) in &other.coeffs {
            let e = self.coeffs.entry(v.clone()).or_insert(0);
            *e += c * k;
        }
        self.coeffs.retain(|_, c| *c != 0);
        self.constant += other.constant * k;
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }
}

/// Comparison against zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Eq,
    Le,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlatLit {
    /// `ctor(args) = result`
    Ctor {
        ctor: CtorId,
        args: Vec<String>,
        result: String,
    },
    /// `sel_{ctor,index}(arg) = result`
    Sel {
        ctor: CtorId,
        index: usize,
        arg: String,
        result: String,
    },
    Tester {
        ctor: CtorId,
        var: String,
        positive: bool,
    },
    VarEq {
        lhs: String,
        rhs: String,
        positive: bool,
    },
    /// `|var| = int_var`
    SizeEq { var: String, int_var: String },
    /// `expr op 0`, or its negation.
    Arith {
        expr: LinExpr,
        op: ArithOp,
        positive: bool,
    },
}

impl FlatLit {
    /// ADT variables mentioned by the literal.
    pub fn adt_vars(&self) -> Vec<&String> {
        match self {
            FlatLit::Ctor { args, result, .. } => args.iter().chain([result]).collect(),
            FlatLit::Sel { arg, result, .. } => vec![arg, result],
            FlatLit::Tester { var, .. } => vec![var],
            FlatLit::VarEq { lhs, rhs, .. } => vec![lhs, rhs],
            FlatLit::SizeEq { var, .. } => vec![var],
            FlatLit::Arith { .. } => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flat {
    True,
    False,
    Lit(FlatLit),
    And(Vec<Flat>),
    Or(Vec<Flat>),
}

impl Flat {
    pub fn literals(&self) -> Vec<&FlatLit> {
        let mut out = Vec::new();
        self.collect_lits(&mut out);
        out
    }

    fn collect_lits<'a>(&'a self, out: &mut Vec<&'a FlatLit>) {
        match self {
            Flat::Lit(l) => out.push(l),
            Flat::And(xs) | Flat::Or(xs) => xs.iter().for_each(|x| x.collect_lits(out)),
            Flat::True | Flat::False => {}
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Flat::True | Flat::False => 1,
            Flat::Lit(l) => match l {
                FlatLit::Ctor { args, .. } => 2 + args.len() + 1,
                FlatLit::Sel { .. } => 4,
                FlatLit::Tester { positive, .. } => 2 + usize::from(!positive),
                FlatLit::VarEq { positive, .. } => 3 + usize::from(!positive),
                FlatLit::SizeEq { .. } => 4,
                FlatLit::Arith { expr, positive, .. } => {
                    3 + 2 * expr.coeffs.len() + usize::from(!positive)
                }
            },
            Flat::And(xs) | Flat::Or(xs) => 1 + xs.iter().map(Flat::node_count).sum::<usize>(),
        }
    }
}

/// What a fresh variable stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FreshDef {
    Ctor(CtorId, Vec<String>),
    Sel(CtorId, usize, String),
    Size(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatFormula {
    pub root: Flat,
    /// Sorts of every variable occurring in `root` (source and fresh).
    pub vars: BTreeMap<String, VarSort>,
    /// Variables of the source formula.
    pub source_vars: BTreeSet<String>,
    /// Fresh variables in creation order with the subterm they name.
    pub fresh: Vec<(String, FreshDef)>,
}

impl FlatFormula {
    pub fn adt_vars(&self) -> impl Iterator<Item = (&String, crate::signature::SortId)> {
        self.vars.iter().filter_map(|(n, s)| match s {
            VarSort::Adt(id) => Some((n, *id)),
            VarSort::Int => None,
        })
    }

    pub fn has_size(&self) -> bool {
        self.root
            .literals()
            .iter()
            .any(|l| matches!(l, FlatLit::SizeEq { .. }))
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        FlatDisplay {
            flat: &self.root,
            sig,
        }
    }
}

/// Generates `<prefix><N>` names that avoid a set of taken names.
#[derive(Debug, Clone)]
pub struct NameGen {
    prefix: String,
    next: usize,
    taken: BTreeSet<String>,
}

impl NameGen {
    pub fn new(prefix: &str, taken: BTreeSet<String>) -> Self {
        NameGen {
            prefix: prefix.to_string(),
            next: 1,
            taken,
        }
    }

    pub fn fresh(&mut self) -> String {
        loop {
            let name = format!("{}{}", self.prefix, self.next);
            self.next += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }
}

/// Names reserved by the signature plus the given variables.
pub fn taken_names(sig: &Signature, vars: impl IntoIterator<Item = String>) -> BTreeSet<String> {
    let mut taken: BTreeSet<String> = vars.into_iter().collect();
    for s in sig.sorts() {
        taken.insert(sig.sort_name(s).to_string());
    }
    for c in sig.all_ctors() {
        let d = sig.ctor(c);
        taken.insert(d.name.clone());
        taken.extend(d.args.iter().map(|a| a.name.clone()));
    }
    taken
}

struct Flattener<'a> {
    sig: &'a Signature,
    names: NameGen,
    vars: BTreeMap<String, VarSort>,
    fresh: Vec<(String, FreshDef)>,
    scopes: Vec<HashMap<FreshDef, String>>,
}

impl Flattener<'_> {
    fn lookup(&self, key: &FreshDef) -> Option<String> {
        self.scopes.iter().rev().find_map(|s| s.get(key).cloned())
    }

    fn define(&mut self, key: FreshDef, sort: VarSort, defs: &mut Vec<Flat>) -> String {
        if let Some(n) = self.lookup(&key) {
            return n;
        }
        let name = self.names.fresh();
        self.vars.insert(name.clone(), sort);
        let lit = match &key {
            FreshDef::Ctor(c, args) => FlatLit::Ctor {
                ctor: *c,
                args: args.clone(),
                result: name.clone(),
            },
            FreshDef::Sel(c, j, a) => FlatLit::Sel {
                ctor: *c,
                index: *j,
                arg: a.clone(),
                result: name.clone(),
            },
            FreshDef::Size(x) => FlatLit::SizeEq {
                var: x.clone(),
                int_var: name.clone(),
            },
        };
        defs.push(Flat::Lit(lit));
        self.fresh.push((name.clone(), key.clone()));
        self.scopes
            .last_mut()
            .expect("a scope is open")
            .insert(key, name.clone());
        name
    }

    /// A variable naming `t`.
    fn name(&mut self, t: &Term, defs: &mut Vec<Flat>) -> String {
        match t {
            Term::Var(n, s) => {
                self.vars.insert(n.clone(), VarSort::Adt(*s));
                n.clone()
            }
            Term::Ctor(c, args) => {
                let names = args.iter().map(|a| self.name(a, defs)).collect();
                self.define(FreshDef::Ctor(*c, names), VarSort::Adt(t.sort(self.sig)), defs)
            }
            Term::Sel(c, j, a) => {
                let arg = self.name(a, defs);
                self.define(FreshDef::Sel(*c, *j, arg), VarSort::Adt(t.sort(self.sig)), defs)
            }
        }
    }

    /// Literal stating `t = v` for a variable `v`.
    fn equation(&mut self, t: &Term, v: String, defs: &mut Vec<Flat>) -> FlatLit {
        match t {
            Term::Var(n, s) => {
                self.vars.insert(n.clone(), VarSort::Adt(*s));
                FlatLit::VarEq {
                    lhs: n.clone(),
                    rhs: v,
                    positive: true,
                }
            }
            Term::Ctor(c, args) => FlatLit::Ctor {
                ctor: *c,
                args: args.iter().map(|a| self.name(a, defs)).collect(),
                result: v,
            },
            Term::Sel(c, j, a) => FlatLit::Sel {
                ctor: *c,
                index: *j,
                arg: self.name(a, defs),
                result: v,
            },
        }
    }

    fn linear(&mut self, e: &IntExpr, defs: &mut Vec<Flat>) -> LinExpr {
        match e {
            IntExpr::Const(c) => LinExpr {
                coeffs: BTreeMap::new(),
                constant: *c,
            },
            IntExpr::Var(n) => {
                self.vars.insert(n.clone(), VarSort::Int);
                LinExpr {
                    coeffs: [(n.clone(), 1)].into(),
                    constant: 0,
                }
            }
            IntExpr::Size(t) => {
                let x = self.name(t, defs);
                let y = self.define(FreshDef::Size(x), VarSort::Int, defs);
                LinExpr {
                    coeffs: [(y, 1)].into(),
                    constant: 0,
                }
            }
            IntExpr::Add(xs) => {
                let mut acc = LinExpr::default();
                for x in xs {
                    let l = self.linear(x, defs);
                    acc.add_scaled(&l, 1);
                }
                acc
            }
            IntExpr::Mul(k, x) => {
                let l = self.linear(x, defs);
                let mut acc = LinExpr::default();
                acc.add_scaled(&l, *k);
                acc
            }
        }
    }

    fn atom(&mut self, f: &Formula, positive: bool, defs: &mut Vec<Flat>) -> Flat {
        match f {
            Formula::Tester(c, t) => {
                let var = self.name(t, defs);
                Flat::Lit(FlatLit::Tester {
                    ctor: *c,
                    var,
                    positive,
                })
            }
            Formula::Eq(a, b) => {
                if positive {
                    let lit = match (a, b) {
                        (_, Term::Var(..)) => {
                            let v = self.name(b, defs);
                            self.equation(a, v, defs)
                        }
                        (Term::Var(..), _) => {
                            let v = self.name(a, defs);
                            self.equation(b, v, defs)
                        }
                        _ => {
                            let v = self.name(b, defs);
                            self.equation(a, v, defs)
                        }
                    };
                    Flat::Lit(lit)
                } else {
                    let lhs = self.name(a, defs);
                    let rhs = self.name(b, defs);
                    Flat::Lit(FlatLit::VarEq {
                        lhs,
                        rhs,
                        positive: false,
                    })
                }
            }
            Formula::IntCmp(op, a, b) => {
                let la = self.linear(a, defs);
                let lb = self.linear(b, defs);
                // a - b and b - a
                let mut amb = la.clone();
                amb.add_scaled(&lb, -1);
                let mut bma = lb;
                bma.add_scaled(&la, -1);
                let (expr, op, positive) = match (op, positive) {
                    (CmpOp::Eq, p) => (amb, ArithOp::Eq, p),
                    (CmpOp::Le, true) | (CmpOp::Gt, false) => (amb, ArithOp::Le, true),
                    (CmpOp::Lt, true) | (CmpOp::Ge, false) => (amb, ArithOp::Lt, true),
                    (CmpOp::Ge, true) | (CmpOp::Lt, false) => (bma, ArithOp::Le, true),
                    (CmpOp::Gt, true) | (CmpOp::Le, false) => (bma, ArithOp::Lt, true),
                };
                Flat::Lit(FlatLit::Arith { expr, op, positive })
            }
            _ => unreachable!("atoms only"),
        }
    }

    fn flat(&mut self, f: &Formula, defs: &mut Vec<Flat>) -> Flat {
        match f {
            Formula::True => Flat::True,
            Formula::False => Flat::False,
            Formula::Not(x) => self.atom(x, false, defs),
            Formula::And(xs) => Flat::And(xs.iter().map(|x| self.flat(x, defs)).collect()),
            Formula::Or(xs) => Flat::Or(xs.iter().map(|x| self.scoped(x)).collect()),
            Formula::Implies(..) => unreachable!("input is in NNF"),
            atom => self.atom(atom, true, defs),
        }
    }

    /// Flattens `f` in a new disjunct scope, conjoining its definitions.
    fn scoped(&mut self, f: &Formula) -> Flat {
        self.scopes.push(HashMap::new());
        let mut defs = Vec::new();
        let body = self.flat(f, &mut defs);
        self.scopes.pop();
        conjoin(defs, body)
    }
}

fn conjoin(mut defs: Vec<Flat>, body: Flat) -> Flat {
    if defs.is_empty() {
        return body;
    }
    match body {
        Flat::And(xs) => defs.extend(xs),
        other => defs.push(other),
    }
    Flat::And(defs)
}

/// Flattens an NNF formula.
pub fn flatten(sig: &Signature, f: &Formula) -> FlatFormula {
    flatten_with(sig, f, "_t")
}

/// Flattens an NNF formula, naming fresh variables `<prefix><N>`.
pub fn flatten_with(sig: &Signature, f: &Formula, prefix: &str) -> FlatFormula {
    let source: BTreeMap<String, VarSort> = f.free_vars().into_iter().collect();
    let names = NameGen::new(prefix, taken_names(sig, source.keys().cloned()));
    let mut fl = Flattener {
        sig,
        names,
        vars: source.clone(),
        fresh: Vec::new(),
        scopes: Vec::new(),
    };
    let root = fl.scoped(f);
    FlatFormula {
        root,
        vars: fl.vars,
        source_vars: source.into_keys().collect(),
        fresh: fl.fresh,
    }
}

/// `flatten(to_nnf(f))`.
pub fn normalize(sig: &Signature, f: &Formula) -> FlatFormula {
    flatten(sig, &to_nnf(f))
}

/// Checks the structural invariants of a flat formula: literals are well
/// typed over declared variables and fresh definitions only refer to
/// earlier variables.
pub fn is_flat(sig: &Signature, ff: &FlatFormula) -> Result<(), String> {
    let adt = |v: &String| match ff.vars.get(v) {
        Some(VarSort::Adt(s)) => Ok(*s),
        _ => Err(format!("`{v}` is not an ADT variable")),
    };
    let int = |v: &String| match ff.vars.get(v) {
        Some(VarSort::Int) => Ok(()),
        _ => Err(format!("`{v}` is not an integer variable")),
    };
    for lit in ff.root.literals() {
        match lit {
            FlatLit::Ctor { ctor, args, result } => {
                let d = sig.ctor(*ctor);
                if args.len() != d.arity() || adt(result)? != d.sort {
                    return Err(format!("ill-typed constructor literal {lit:?}"));
                }
                for (a, slot) in args.iter().zip(&d.args) {
                    if adt(a)? != slot.sort {
                        return Err(format!("ill-typed constructor literal {lit:?}"));
                    }
                }
            }
            FlatLit::Sel {
                ctor,
                index,
                arg,
                result,
            } => {
                let d = sig.ctor(*ctor);
                if *index >= d.arity() || adt(arg)? != d.sort || adt(result)? != d.args[*index].sort {
                    return Err(format!("ill-typed selector literal {lit:?}"));
                }
            }
            FlatLit::Tester { ctor, var, .. } => {
                if adt(var)? != sig.ctor(*ctor).sort {
                    return Err(format!("ill-typed tester {lit:?}"));
                }
            }
            FlatLit::VarEq { lhs, rhs, .. } => {
                if adt(lhs)? != adt(rhs)? {
                    return Err(format!("ill-typed equation {lit:?}"));
                }
            }
            FlatLit::SizeEq { var, int_var } => {
                adt(var)?;
                int(int_var)?;
            }
            FlatLit::Arith { expr, .. } => {
                for v in expr.vars() {
                    int(v)?;
                }
            }
        }
    }
    let mut seen: BTreeSet<&String> = ff.source_vars.iter().collect();
    for (name, def) in &ff.fresh {
        let uses: Vec<&String> = match def {
            FreshDef::Ctor(_, args) => args.iter().collect(),
            FreshDef::Sel(_, _, a) | FreshDef::Size(a) => vec![a],
        };
        if let Some(u) = uses.iter().find(|u| !seen.contains(*u)) {
            return Err(format!("fresh `{name}` refers to later variable `{u}`"));
        }
        seen.insert(name);
    }
    Ok(())
}

struct FlatDisplay<'a> {
    flat: &'a Flat,
    sig: &'a Signature,
}

pub(crate) fn lin_to_string(e: &LinExpr) -> String {
    let mut parts: Vec<String> = e
        .coeffs
        .iter()
        .map(|(v, c)| match c {
            1 => v.clone(),
            c if *c < 0 => format!("(* (- {}) {v})", c.unsigned_abs()),
            c => format!("(* {c} {v})"),
        })
        .collect();
    if e.constant != 0 || parts.is_empty() {
        parts.push(if e.constant < 0 {
            format!("(- {})", e.constant.unsigned_abs())
        } else {
            e.constant.to_string()
        });
    }
    if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

impl fmt::Display for FlatDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = self.sig;
        let neg = |f: &mut fmt::Formatter<'_>, positive: bool, s: String| {
            if positive {
                write!(f, "{s}")
            } else {
                write!(f, "(not {s})")
            }
        };
        match self.flat {
            Flat::True => write!(f, "true"),
            Flat::False => write!(f, "false"),
            Flat::Lit(l) => match l {
                FlatLit::Ctor { ctor, args, result } => {
                    if args.is_empty() {
                        write!(f, "(= {} {result})", sig.ctor_name(*ctor))
                    } else {
                        write!(f, "(= ({} {}) {result})", sig.ctor_name(*ctor), args.join(" "))
                    }
                }
                FlatLit::Sel {
                    ctor,
                    index,
                    arg,
                    result,
                } => write!(f, "(= ({} {arg}) {result})", sig.selector_name(*ctor, *index)),
                FlatLit::Tester {
                    ctor,
                    var,
                    positive,
                } => neg(f, *positive, format!("((_ is {}) {var})", sig.ctor_name(*ctor))),
                FlatLit::VarEq { lhs, rhs, positive } => {
                    neg(f, *positive, format!("(= {lhs} {rhs})"))
                }
                FlatLit::SizeEq { var, int_var } => write!(f, "(= (adt.size {var}) {int_var})"),
                FlatLit::Arith { expr, op, positive } => {
                    let op = match op {
                        ArithOp::Eq => "=",
                        ArithOp::Le => "<=",
                        ArithOp::Lt => "<",
                    };
                    neg(f, *positive, format!("({op} {} 0)", lin_to_string(expr)))
                }
            },
            Flat::And(xs) | Flat::Or(xs) => {
                let op = if matches!(self.flat, Flat::And(_)) { "and" } else { "or" };
                write!(f, "({op}")?;
                for x in xs {
                    write!(f, " {}", FlatDisplay { flat: x, sig })?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;

    const LISTS: &str = "(declare-datatypes ((Colour 0) (CList 0)) \
        (((red) (green) (blue)) ((nil) (cons (head Colour) (tail CList)))))\n\
        (declare-const x CList)\n(declare-const y Colour)\n";

    #[test]
    fn nnf_pushes_negations() {
        let s = parse(&format!(
            "{LISTS}(declare-const a Colour)(declare-const b Colour)\
             (assert (not (and (= a red) (not (= b red)))))"
        ))
        .unwrap();
        let n = to_nnf(&s.assertions[0]);
        assert_eq!(
            n.display(&s.sig).to_string(),
            "(or (not (= a red)) (= b red))"
        );
    }

    #[test]
    fn disjunction_flattens_into_fresh_variables() {
        let s = parse(&format!(
            "{LISTS}(assert (or (= (head x) red) (= x (cons y nil))))"
        ))
        .unwrap();
        let ff = normalize(&s.sig, &s.formula());
        assert_eq!(
            ff.display(&s.sig).to_string(),
            "(or (and (= red _t1) (= (head x) _t1)) (and (= nil _t2) (= (cons y _t2) x)))"
        );
        is_flat(&s.sig, &ff).unwrap();
    }

    #[test]
    fn nested_selectors_are_named_once() {
        let s = parse(&format!(
            "{LISTS}(assert (and (= (head (tail x)) red) (not (= (head (tail x)) y))))"
        ))
        .unwrap();
        let ff = normalize(&s.sig, &s.formula());
        assert_eq!(
            ff.display(&s.sig).to_string(),
            "(and (= red _t1) (= (tail x) _t2) (= (head _t2) _t3) \
             (= (head _t2) _t1) (not (= _t3 y)))"
        );
        is_flat(&s.sig, &ff).unwrap();
        assert!(ff.fresh.len() <= s.formula().symbol_count());
    }

    #[test]
    fn already_flat_equation_is_unchanged() {
        let s = parse(&format!("{LISTS}(declare-const z CList)(assert (= x z))")).unwrap();
        let ff = normalize(&s.sig, &s.formula());
        assert_eq!(ff.display(&s.sig).to_string(), "(= x z)");
        assert!(ff.fresh.is_empty());
    }

    #[test]
    fn sizes_become_integer_variables() {
        let s = parse(&format!(
            "{LISTS}(declare-const n Int)(assert (not (= (adt.size (tail x)) (+ n 3))))"
        ))
        .unwrap();
        let ff = normalize(&s.sig, &s.formula());
        assert_eq!(
            ff.display(&s.sig).to_string(),
            "(and (= (tail x) _t1) (= (adt.size _t1) _t2) (not (= (+ _t2 (* (- 1) n) (- 3)) 0)))"
        );
        assert!(ff.has_size());
    }
}
