//! Terms, formulas, scripts and explicit ADT models.

mod eval;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};

use crate::signature::{CtorId, Signature, SortId};

pub use eval::{evaluate, evaluate_term, EvalError, Evaluator};
pub use parse::{parse, parse_with, ParseError, ParseErrors};
pub use print::{print_model, print_script};
pub(crate) use print::write_symbol;

/// ADT terms. Variables carry their sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String, SortId),
    Ctor(CtorId, Vec<Term>),
    /// `Sel(f, j, t)` is the `j`-th (zero-based) selector of `f` applied to `t`.
    Sel(CtorId, usize, Box<Term>),
}

impl Term {
    pub fn var(name: &str, sort: SortId) -> Term {
        Term::Var(name.to_string(), sort)
    }

    pub fn sort(&self, sig: &Signature) -> SortId {
        match self {
            Term::Var(_, s) => *s,
            Term::Ctor(c, _) => sig.ctor(*c).sort,
            Term::Sel(c, j, _) => sig.ctor(*c).args[*j].sort,
        }
    }

    /// Number of constructor occurrences. Only meaningful for ground constructor terms.
    pub fn size(&self) -> u64 {
        match self {
            Term::Ctor(_, args) => 1 + args.iter().map(Term::size).sum::<u64>(),
            Term::Var(..) | Term::Sel(..) => 0,
        }
    }

    pub fn depth(&self) -> u64 {
        match self {
            Term::Ctor(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn is_ground_ctor(&self) -> bool {
        match self {
            Term::Ctor(_, args) => args.iter().all(Term::is_ground_ctor),
            _ => false,
        }
    }

    pub fn head(&self) -> Option<CtorId> {
        match self {
            Term::Ctor(c, _) => Some(*c),
            _ => None,
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<(String, VarSort)>) {
        match self {
            Term::Var(n, s) => {
                out.insert((n.clone(), VarSort::Adt(*s)));
            }
            Term::Ctor(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Sel(_, _, t) => t.collect_vars(out),
        }
    }

    /// Number of function symbol occurrences (constructors and selectors).
    pub fn symbol_count(&self) -> usize {
        match self {
            Term::Var(..) => 0,
            Term::Ctor(_, args) => 1 + args.iter().map(Term::symbol_count).sum::<usize>(),
            Term::Sel(_, _, t) => 1 + t.symbol_count(),
        }
    }

    fn node_count(&self) -> usize {
        match self {
            Term::Var(..) => 1,
            Term::Ctor(_, args) => 1 + args.iter().map(Term::node_count).sum::<usize>(),
            Term::Sel(_, _, t) => 1 + t.node_count(),
        }
    }
}

/// Sort of a declared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarSort {
    Adt(SortId),
    Int,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntExpr {
    Const(i64),
    Var(String),
    Size(Term),
    Add(Vec<IntExpr>),
    /// Constant multiple.
    Mul(i64, Box<IntExpr>),
}

impl IntExpr {
    fn collect_vars(&self, out: &mut BTreeSet<(String, VarSort)>) {
        match self {
            IntExpr::Const(_) => {}
            IntExpr::Var(n) => {
                out.insert((n.clone(), VarSort::Int));
            }
            IntExpr::Size(t) => t.collect_vars(out),
            IntExpr::Add(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            IntExpr::Mul(_, x) => x.collect_vars(out),
        }
    }

    fn node_count(&self) -> usize {
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) => 1,
            IntExpr::Size(t) => 1 + t.node_count(),
            IntExpr::Add(xs) => 1 + xs.iter().map(IntExpr::node_count).sum::<usize>(),
            IntExpr::Mul(_, x) => 2 + x.node_count(),
        }
    }

    fn symbol_count(&self) -> usize {
        match self {
            IntExpr::Const(_) | IntExpr::Var(_) => 0,
            IntExpr::Size(t) => 1 + t.symbol_count(),
            IntExpr::Add(xs) => xs.iter().map(IntExpr::symbol_count).sum(),
            IntExpr::Mul(_, x) => x.symbol_count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, a: i128, b: i128) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Tester(CtorId, Term),
    Eq(Term, Term),
    /// Presburger atom over sizes and integer variables.
    IntCmp(CmpOp, IntExpr, IntExpr),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        Formula::Or(fs)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn free_vars(&self) -> BTreeSet<(String, VarSort)> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<(String, VarSort)>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Tester(_, t) => t.collect_vars(out),
            Formula::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::IntCmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
            Formula::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// True if the formula contains a size atom.
    pub fn has_size(&self) -> bool {
        match self {
            Formula::IntCmp(..) => true,
            Formula::Not(f) => f.has_size(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_size),
            Formula::Implies(a, b) => a.has_size() || b.has_size(),
            _ => false,
        }
    }

    /// Number of sub-expressions (terms, atoms and connectives).
    pub fn node_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::Tester(_, t) => 1 + t.node_count(),
            Formula::Eq(a, b) => 1 + a.node_count() + b.node_count(),
            Formula::IntCmp(_, a, b) => 1 + a.node_count() + b.node_count(),
            Formula::Not(f) => 1 + f.node_count(),
            Formula::And(fs) | Formula::Or(fs) => {
                1 + fs.iter().map(Formula::node_count).sum::<usize>()
            }
            Formula::Implies(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Number of constructor, selector and size occurrences.
    pub fn symbol_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Tester(_, t) => t.symbol_count(),
            Formula::Eq(a, b) => a.symbol_count() + b.symbol_count(),
            Formula::IntCmp(_, a, b) => a.symbol_count() + b.symbol_count(),
            Formula::Not(f) => f.symbol_count(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::symbol_count).sum(),
            Formula::Implies(a, b) => a.symbol_count() + b.symbol_count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckSat,
    GetModel,
}

/// A parsed input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub sig: Signature,
    /// Declared constants in declaration order.
    pub vars: Vec<(String, VarSort)>,
    pub assertions: Vec<Formula>,
    pub commands: Vec<Command>,
}

impl Script {
    pub fn var_sort(&self, name: &str) -> Option<VarSort> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    /// Conjunction of all assertions.
    pub fn formula(&self) -> Formula {
        match self.assertions.len() {
            0 => Formula::True,
            1 => self.assertions[0].clone(),
            _ => Formula::And(self.assertions.clone()),
        }
    }
}

/// Assignment of ground constructor terms and integers to variables.
///
/// `selector_overrides` fixes the value of a selector applied to a term
/// built with a different constructor; unlisted cases fall back to the
/// default witness of the target sort.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdtModel {
    pub adt: BTreeMap<String, Term>,
    pub ints: BTreeMap<String, i64>,
    pub selector_overrides: BTreeMap<(CtorId, usize, Term), Term>,
}

impl AdtModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_adt(mut self, name: &str, t: Term) -> Self {
        self.adt.insert(name.to_string(), t);
        self
    }

    pub fn with_int(mut self, name: &str, v: i64) -> Self {
        self.ints.insert(name.to_string(), v);
        self
    }
}
