//! SMT-LIB style printing.

use std::fmt;

use super::{AdtModel, Formula, IntExpr, Script, Term, VarSort};
use crate::signature::Signature;

/// Writes a symbol, quoting it with `|...|` when it is not a simple symbol.
pub(crate) fn write_symbol(f: &mut dyn fmt::Write, s: &str) -> fmt::Result {
    if is_simple_symbol(s) {
        write!(f, "{s}")
    } else {
        write!(f, "|{s}|")
    }
}

pub(crate) fn is_simple_symbol(s: &str) -> bool {
    const EXTRA: &str = "~!@$%^&*_-+=<>.?/";
    !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c))
}

pub(crate) fn write_int(f: &mut fmt::Formatter<'_>, v: i64) -> fmt::Result {
    if v < 0 {
        write!(f, "(- {})", v.unsigned_abs())
    } else {
        write!(f, "{v}")
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(n, _) => write_symbol(f, n),
            Term::Ctor(c, args) if args.is_empty() => write_symbol(f, self.sig.ctor_name(*c)),
            Term::Ctor(c, args) => {
                write!(f, "(")?;
                write_symbol(f, self.sig.ctor_name(*c))?;
                for a in args {
                    write!(f, " {}", a.display(self.sig))?;
                }
                write!(f, ")")
            }
            Term::Sel(c, j, t) => {
                write!(f, "(")?;
                write_symbol(f, self.sig.selector_name(*c, *j))?;
                write!(f, " {})", t.display(self.sig))
            }
        }
    }
}

impl Term {
    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

pub struct IntExprDisplay<'a> {
    expr: &'a IntExpr,
    sig: &'a Signature,
}

impl fmt::Display for IntExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            IntExpr::Const(v) => write_int(f, *v),
            IntExpr::Var(n) => write_symbol(f, n),
            IntExpr::Size(t) => write!(f, "(adt.size {})", t.display(self.sig)),
            IntExpr::Add(xs) => {
                write!(f, "(+")?;
                for x in xs {
                    write!(f, " {}", x.display(self.sig))?;
                }
                write!(f, ")")
            }
            IntExpr::Mul(c, x) => {
                write!(f, "(* ")?;
                write_int(f, *c)?;
                write!(f, " {})", x.display(self.sig))
            }
        }
    }
}

impl IntExpr {
    pub fn display<'a>(&'a self, sig: &'a Signature) -> IntExprDisplay<'a> {
        IntExprDisplay { expr: self, sig }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    sig: &'a Signature,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = self.sig;
        match self.formula {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Tester(c, t) => {
                write!(f, "((_ is ")?;
                write_symbol(f, sig.ctor_name(*c))?;
                write!(f, ") {})", t.display(sig))
            }
            Formula::Eq(a, b) => write!(f, "(= {} {})", a.display(sig), b.display(sig)),
            Formula::IntCmp(op, a, b) => write!(
                f,
                "({} {} {})",
                op.symbol(),
                a.display(sig),
                b.display(sig)
            ),
            Formula::Not(x) => write!(f, "(not {})", x.display(sig)),
            Formula::And(xs) | Formula::Or(xs) => {
                let op = if matches!(self.formula, Formula::And(_)) {
                    "and"
                } else {
                    "or"
                };
                if xs.is_empty() {
                    return write!(f, "{}", if op == "and" { "true" } else { "false" });
                }
                write!(f, "({op}")?;
                for x in xs {
                    write!(f, " {}", x.display(sig))?;
                }
                write!(f, ")")
            }
            Formula::Implies(a, b) => write!(f, "(=> {} {})", a.display(sig), b.display(sig)),
        }
    }
}

impl Formula {
    pub fn display<'a>(&'a self, sig: &'a Signature) -> FormulaDisplay<'a> {
        FormulaDisplay { formula: self, sig }
    }
}

fn sort_label(sig: &Signature, s: VarSort) -> String {
    match s {
        VarSort::Adt(id) => {
            let name = sig.sort_name(id);
            if is_simple_symbol(name) {
                name.to_string()
            } else {
                format!("|{name}|")
            }
        }
        VarSort::Int => "Int".into(),
    }
}

struct Sym<'a>(&'a str);

impl fmt::Display for Sym<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbol(f, self.0)
    }
}

struct Int(i64);

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_int(f, self.0)
    }
}

/// Prints a model as a parenthesized list of `define-fun` commands,
/// ADT variables first, each group in name order.
pub fn print_model(sig: &Signature, model: &AdtModel) -> String {
    let mut out = String::from("(\n");
    for (name, t) in &model.adt {
        let sort = sort_label(sig, VarSort::Adt(t.sort(sig)));
        out.push_str(&format!(
            "  (define-fun {} () {} {})\n",
            Sym(name),
            sort,
            t.display(sig)
        ));
    }
    for (name, v) in &model.ints {
        out.push_str(&format!("  (define-fun {} () Int {})\n", Sym(name), Int(*v)));
    }
    out.push(')');
    out
}

/// Prints a whole script: datatypes, constants, assertions and commands.
pub fn print_script(script: &Script) -> String {
    let sig = &script.sig;
    let mut out = String::new();
    if sig.num_sorts() > 0 {
        out.push_str(&sig.to_smtlib());
        out.push('\n');
    }
    for (name, sort) in &script.vars {
        out.push_str(&format!(
            "(declare-const {} {})\n",
            Sym(name),
            sort_label(sig, *sort)
        ));
    }
    for a in &script.assertions {
        out.push_str(&format!("(assert {})\n", a.display(sig)));
    }
    for c in &script.commands {
        out.push_str(match c {
            super::Command::CheckSat => "(check-sat)\n",
            super::Command::GetModel => "(get-model)\n",
        });
    }
    out
}
