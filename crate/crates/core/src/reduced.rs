//! Quantifier-free EUF+LIA formulas over the integers, the target of the
//! reduction, together with the table linking reduced symbols to their
//! source.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::{write_symbol, CmpOp, VarSort};
use crate::signature::{CtorId, SortId};

/// Integer-valued term: variable, constant or uninterpreted application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ITerm {
    Var(String),
    Const(i64),
    App(String, Vec<ITerm>),
}

impl ITerm {
    pub fn var(name: &str) -> ITerm {
        ITerm::Var(name.to_string())
    }

    pub fn app(f: &str, args: Vec<ITerm>) -> ITerm {
        ITerm::App(f.to_string(), args)
    }

    pub fn node_count(&self) -> usize {
        match self {
            ITerm::Var(_) | ITerm::Const(_) => 1,
            ITerm::App(_, args) => 1 + args.iter().map(ITerm::node_count).sum::<usize>(),
        }
    }

    pub fn visit_vars<'a>(&'a self, out: &mut dyn FnMut(&'a str)) {
        match self {
            ITerm::Var(v) => out(v),
            ITerm::Const(_) => {}
            ITerm::App(_, args) => args.iter().for_each(|a| a.visit_vars(out)),
        }
    }

    pub fn visit_apps<'a>(&'a self, out: &mut dyn FnMut(&'a ITerm)) {
        if let ITerm::App(_, args) = self {
            args.iter().for_each(|a| a.visit_apps(out));
            out(self);
        }
    }

    /// Bottom-up rewrite.
    pub fn map(&self, f: &mut dyn FnMut(ITerm) -> ITerm) -> ITerm {
        let t = match self {
            ITerm::App(g, args) => ITerm::App(g.clone(), args.iter().map(|a| a.map(f)).collect()),
            other => other.clone(),
        };
        f(t)
    }
}

/// `sum c_i * t_i + constant`, kept in construction order for display.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lin {
    pub terms: Vec<(i64, ITerm)>,
    pub constant: i64,
}

impl Lin {
    pub fn term(t: ITerm) -> Lin {
        match t {
            ITerm::Const(c) => Lin::constant(c),
            t => Lin {
                terms: vec![(1, t)],
                constant: 0,
            },
        }
    }

    pub fn constant(c: i64) -> Lin {
        Lin {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(name: &str) -> Lin {
        Lin::term(ITerm::var(name))
    }

    pub fn sum(terms: Vec<(i64, ITerm)>, constant: i64) -> Lin {
        Lin { terms, constant }
    }

    /// Merged coefficients, constants folded, zero terms dropped.
    pub fn canonical(&self) -> (BTreeMap<ITerm, i64>, i64) {
        let mut map = BTreeMap::new();
        let mut constant = self.constant;
        for (c, t) in &self.terms {
            match t {
                ITerm::Const(k) => constant += c * k,
                t => *map.entry(t.clone()).or_insert(0) += c,
            }
        }
        map.retain(|_, c| *c != 0);
        (map, constant)
    }

    pub fn is_constant(&self) -> Option<i64> {
        let (m, c) = self.canonical();
        m.is_empty().then_some(c)
    }

    pub fn node_count(&self) -> usize {
        let terms: usize = self
            .terms
            .iter()
            .map(|(c, t)| t.node_count() + usize::from(*c != 1))
            .sum();
        let parts = self.terms.len() + usize::from(self.constant != 0 || self.terms.is_empty());
        terms + usize::from(self.constant != 0 || self.terms.is_empty()) + usize::from(parts > 1)
    }

    pub fn map_terms(&self, f: &mut dyn FnMut(ITerm) -> ITerm) -> Lin {
        let mut out = Lin::constant(self.constant);
        for (c, t) in &self.terms {
            match t.map(f) {
                ITerm::Const(k) => out.constant += c * k,
                t => out.terms.push((*c, t)),
            }
        }
        out
    }
}

/// Normal form of an atom: `sum coeffs * terms + constant (= | <=) 0`,
/// with equalities sign-normalized so the first coefficient is positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomKey {
    pub is_eq: bool,
    pub coeffs: Vec<(ITerm, i64)>,
    pub constant: i64,
}

impl AtomKey {
    pub fn new(op: CmpOp, a: &Lin, b: &Lin) -> AtomKey {
        let (ma, ca) = a.canonical();
        let (mb, cb) = b.canonical();
        // d = a - b
        let mut d = ma;
        for (t, c) in mb {
            *d.entry(t).or_insert(0) -= c;
        }
        d.retain(|_, c| *c != 0);
        let mut constant = ca - cb;
        let mut coeffs: Vec<(ITerm, i64)> = d.into_iter().collect();
        let negate = |coeffs: &mut Vec<(ITerm, i64)>, constant: &mut i64| {
            coeffs.iter_mut().for_each(|(_, c)| *c = -*c);
            *constant = -*constant;
        };
        let is_eq = match op {
            CmpOp::Eq => {
                if coeffs.first().is_some_and(|(_, c)| *c < 0)
                    || (coeffs.is_empty() && constant < 0)
                {
                    negate(&mut coeffs, &mut constant);
                }
                true
            }
            CmpOp::Le => false,
            CmpOp::Lt => {
                constant += 1;
                false
            }
            CmpOp::Ge => {
                negate(&mut coeffs, &mut constant);
                false
            }
            CmpOp::Gt => {
                negate(&mut coeffs, &mut constant);
                constant += 1;
                false
            }
        };
        AtomKey {
            is_eq,
            coeffs,
            constant,
        }
    }

    /// Truth value when no terms remain.
    pub fn constant_value(&self) -> Option<bool> {
        if !self.coeffs.is_empty() {
            return None;
        }
        Some(if self.is_eq {
            self.constant == 0
        } else {
            self.constant <= 0
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RFormula {
    True,
    False,
    Cmp(CmpOp, Lin, Lin),
    Not(Box<RFormula>),
    And(Vec<RFormula>),
    Or(Vec<RFormula>),
}

impl RFormula {
    pub fn eq(a: ITerm, b: ITerm) -> RFormula {
        RFormula::Cmp(CmpOp::Eq, Lin::term(a), Lin::term(b))
    }

    pub fn cmp(op: CmpOp, a: Lin, b: Lin) -> RFormula {
        RFormula::Cmp(op, a, b)
    }

    pub fn not(f: RFormula) -> RFormula {
        RFormula::Not(Box::new(f))
    }

    /// Conjunction; a single conjunct is returned as is.
    pub fn and(mut xs: Vec<RFormula>) -> RFormula {
        if xs.len() == 1 {
            xs.pop().expect("one conjunct")
        } else {
            RFormula::And(xs)
        }
    }

    /// Disjunction; a single disjunct is returned as is.
    pub fn or(mut xs: Vec<RFormula>) -> RFormula {
        if xs.len() == 1 {
            xs.pop().expect("one disjunct")
        } else {
            RFormula::Or(xs)
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            RFormula::True | RFormula::False => 1,
            RFormula::Cmp(_, a, b) => 1 + a.node_count() + b.node_count(),
            RFormula::Not(x) => 1 + x.node_count(),
            RFormula::And(xs) | RFormula::Or(xs) => {
                1 + xs.iter().map(RFormula::node_count).sum::<usize>()
            }
        }
    }

    pub fn visit_atoms<'a>(&'a self, out: &mut dyn FnMut(CmpOp, &'a Lin, &'a Lin)) {
        match self {
            RFormula::Cmp(op, a, b) => out(*op, a, b),
            RFormula::Not(x) => x.visit_atoms(out),
            RFormula::And(xs) | RFormula::Or(xs) => xs.iter().for_each(|x| x.visit_atoms(out)),
            RFormula::True | RFormula::False => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |_, a, b| {
            for (_, t) in a.terms.iter().chain(&b.terms) {
                t.visit_vars(&mut |v| {
                    out.insert(v.to_string());
                });
            }
        });
        out
    }

    /// Function symbols with the arities they are used at.
    pub fn functions(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.visit_atoms(&mut |_, a, b| {
            for (_, t) in a.terms.iter().chain(&b.terms) {
                t.visit_apps(&mut |app| {
                    if let ITerm::App(f, args) = app {
                        out.insert(f.clone(), args.len());
                    }
                });
            }
        });
        out
    }

    /// Rewrites every term bottom-up.
    pub fn map_terms(&self, f: &mut dyn FnMut(ITerm) -> ITerm) -> RFormula {
        match self {
            RFormula::Cmp(op, a, b) => RFormula::Cmp(*op, a.map_terms(f), b.map_terms(f)),
            RFormula::Not(x) => RFormula::not(x.map_terms(f)),
            RFormula::And(xs) => RFormula::And(xs.iter().map(|x| x.map_terms(f)).collect()),
            RFormula::Or(xs) => RFormula::Or(xs.iter().map(|x| x.map_terms(f)).collect()),
            other => other.clone(),
        }
    }

    /// Boolean skeleton: connectives kept, atoms replaced by a marker.
    pub fn skeleton(&self) -> String {
        match self {
            RFormula::True => "T".into(),
            RFormula::False => "F".into(),
            RFormula::Cmp(..) => "a".into(),
            RFormula::Not(x) => format!("!{}", x.skeleton()),
            RFormula::And(xs) | RFormula::Or(xs) => {
                let op = if matches!(self, RFormula::And(_)) { '&' } else { '|' };
                let parts: Vec<String> = xs.iter().map(RFormula::skeleton).collect();
                format!("{op}({})", parts.join(","))
            }
        }
    }
}

/// What a reduced function symbol stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FunOrigin {
    Ctor(CtorId),
    Sel(CtorId, usize),
    CtorIdOf(SortId),
    Depth(SortId),
    Size(SortId),
}

/// Where a reduced integer variable comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarOrigin {
    /// A variable of the source formula.
    Source,
    /// A variable introduced by flattening or unfolding.
    Fresh,
    /// A Skolem constant of an `ExCtorSpec` instance.
    Skolem,
    /// An integer multiplier of a size-image constraint.
    Aux,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub sort: VarSort,
    pub origin: VarOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolTable {
    pub funs: BTreeMap<String, (usize, FunOrigin)>,
    pub vars: BTreeMap<String, VarInfo>,
    /// Sorts whose terms are mapped directly to constructor indices.
    pub enum_sorts: BTreeSet<SortId>,
}

impl SymbolTable {
    pub fn fun_origin(&self, name: &str) -> Option<FunOrigin> {
        self.funs.get(name).map(|(_, o)| *o)
    }

    pub fn fun_name(&self, origin: FunOrigin) -> Option<&str> {
        self.funs
            .iter()
            .find(|(_, (_, o))| *o == origin)
            .map(|(n, _)| n.as_str())
    }

    pub fn adt_sort(&self, var: &str) -> Option<SortId> {
        match self.vars.get(var)?.sort {
            VarSort::Adt(s) => Some(s),
            VarSort::Int => None,
        }
    }
}

// ---- printing ----

pub(crate) fn write_iterm(f: &mut dyn fmt::Write, t: &ITerm) -> fmt::Result {
    match t {
        ITerm::Var(v) => write_symbol(f, v),
        ITerm::Const(c) => write_int(f, *c),
        ITerm::App(g, args) if args.is_empty() => write_symbol(f, g),
        ITerm::App(g, args) => {
            write!(f, "(")?;
            write_symbol(f, g)?;
            for a in args {
                write!(f, " ")?;
                write_iterm(f, a)?;
            }
            write!(f, ")")
        }
    }
}

fn write_int(f: &mut dyn fmt::Write, c: i64) -> fmt::Result {
    if c < 0 {
        write!(f, "(- {})", c.unsigned_abs())
    } else {
        write!(f, "{c}")
    }
}

pub(crate) fn write_lin(f: &mut dyn fmt::Write, l: &Lin) -> fmt::Result {
    let mut parts: Vec<String> = Vec::new();
    for (c, t) in &l.terms {
        let mut s = String::new();
        if *c == 1 {
            write_iterm(&mut s, t)?;
        } else {
            s.push_str("(* ");
            write_int(&mut s, *c)?;
            s.push(' ');
            write_iterm(&mut s, t)?;
            s.push(')');
        }
        parts.push(s);
    }
    if l.constant != 0 || parts.is_empty() {
        let mut s = String::new();
        write_int(&mut s, l.constant)?;
        parts.push(s);
    }
    if parts.len() == 1 {
        write!(f, "{}", parts[0])
    } else {
        write!(f, "(+ {})", parts.join(" "))
    }
}

pub(crate) fn write_rformula(f: &mut dyn fmt::Write, x: &RFormula) -> fmt::Result {
    match x {
        RFormula::True => write!(f, "true"),
        RFormula::False => write!(f, "false"),
        RFormula::Cmp(op, a, b) => {
            write!(f, "({} ", op.symbol())?;
            write_lin(f, a)?;
            write!(f, " ")?;
            write_lin(f, b)?;
            write!(f, ")")
        }
        RFormula::Not(y) => {
            write!(f, "(not ")?;
            write_rformula(f, y)?;
            write!(f, ")")
        }
        RFormula::And(xs) | RFormula::Or(xs) => {
            let op = if matches!(x, RFormula::And(_)) { "and" } else { "or" };
            if xs.is_empty() {
                return write!(f, "{}", if op == "and" { "true" } else { "false" });
            }
            write!(f, "({op}")?;
            for y in xs {
                write!(f, " ")?;
                write_rformula(f, y)?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for ITerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_iterm(f, self)
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_lin(f, self)
    }
}

impl fmt::Display for RFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rformula(f, self)
    }
}
