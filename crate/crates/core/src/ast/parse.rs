//! Parser for the SMT-LIB 2.6 subset accepted as input.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{CmpOp, Command, Formula, IntExpr, Script, Term, VarSort};
use crate::sexp::{parse_all, Sexp, SexpKind};
use crate::signature::{CtorSpec, Signature, SignatureDecl, SignatureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("type error at {line}:{col}: `{expr}` has type {found}, expected {expected}")]
    Type {
        line: usize,
        col: usize,
        expr: String,
        expected: String,
        found: String,
    },
    #[error("unknown symbol `{name}` at {line}:{col}")]
    UnknownSymbol { line: usize, col: usize, name: String },
    #[error("invalid datatype declaration at {line}:{col}: {}", join_errors(.errors))]
    Signature {
        line: usize,
        col: usize,
        errors: Vec<SignatureError>,
    },
}

fn join_errors(errors: &[SignatureError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// All errors found in a script, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}

fn syntax(s: &Sexp, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: s.pos.line,
        col: s.pos.col,
        msg: msg.into(),
    }
}

fn unknown(s: &Sexp, name: &str) -> ParseError {
    ParseError::UnknownSymbol {
        line: s.pos.line,
        col: s.pos.col,
        name: name.to_string(),
    }
}

/// Parses a complete script.
pub fn parse(text: &str) -> Result<Script, ParseErrors> {
    Parser::new(SignatureDecl::new(), Vec::new()).run(text)
}

/// Parses `text` in the context of the declarations of `base` (its
/// assertions and commands are not inherited).
pub fn parse_with(text: &str, base: &Script) -> Result<Script, ParseErrors> {
    Parser::new(base.sig.to_decl(), base.vars.clone()).run(text)
}

enum Value {
    Term(Term),
    Int(IntExpr),
    Bool(Formula),
}

impl Value {
    fn type_name(&self, sig: &Signature) -> String {
        match self {
            Value::Term(t) => sig.sort_name(t.sort(sig)).to_string(),
            Value::Int(_) => "Int".into(),
            Value::Bool(_) => "Bool".into(),
        }
    }
}

struct Parser {
    decl: SignatureDecl,
    sig: Signature,
    vars: Vec<(String, VarSort)>,
    var_index: BTreeMap<String, VarSort>,
    assertions: Vec<Formula>,
    commands: Vec<Command>,
    errors: Vec<ParseError>,
}

impl Parser {
    fn new(decl: SignatureDecl, vars: Vec<(String, VarSort)>) -> Self {
        let sig = decl.validate().expect("base signature is valid");
        let var_index = vars.iter().cloned().collect();
        Parser {
            decl,
            sig,
            vars,
            var_index,
            assertions: Vec::new(),
            commands: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn run(mut self, text: &str) -> Result<Script, ParseErrors> {
        let cmds = match parse_all(text) {
            Ok(c) => c,
            Err(e) => {
                return Err(ParseErrors(vec![ParseError::Syntax {
                    line: e.line,
                    col: e.col,
                    msg: e.msg,
                }]))
            }
        };
        for cmd in &cmds {
            if let Err(e) = self.command(cmd) {
                self.errors.push(e);
            }
        }
        if self.errors.is_empty() {
            Ok(Script {
                sig: self.sig,
                vars: self.vars,
                assertions: self.assertions,
                commands: self.commands,
            })
        } else {
            Err(ParseErrors(self.errors))
        }
    }

    fn command(&mut self, cmd: &Sexp) -> Result<(), ParseError> {
        let items = cmd
            .as_list()
            .ok_or_else(|| syntax(cmd, "expected a command"))?;
        let head = cmd
            .head_symbol()
            .ok_or_else(|| syntax(cmd, "expected a command name"))?;
        match head {
            "set-logic" | "set-option" | "set-info" | "exit" => Ok(()),
            "declare-datatypes" => self.declare_datatypes(cmd, items),
            "declare-datatype" => self.declare_datatype(cmd, items),
            "declare-const" => {
                if items.len() != 3 {
                    return Err(syntax(cmd, "expected (declare-const name sort)"));
                }
                self.declare_var(&items[1], &items[2])
            }
            "declare-fun" => {
                if items.len() != 4 {
                    return Err(syntax(cmd, "expected (declare-fun name () sort)"));
                }
                match items[2].as_list() {
                    Some([]) => self.declare_var(&items[1], &items[3]),
                    _ => Err(syntax(&items[2], "only nullary functions are supported")),
                }
            }
            "assert" => {
                if items.len() != 2 {
                    return Err(syntax(cmd, "expected (assert formula)"));
                }
                let f = self.formula(&items[1])?;
                self.assertions.push(f);
                Ok(())
            }
            "check-sat" => {
                self.commands.push(Command::CheckSat);
                Ok(())
            }
            "get-model" => {
                self.commands.push(Command::GetModel);
                Ok(())
            }
            other => Err(syntax(cmd, format!("unsupported command `{other}`"))),
        }
    }

    fn symbol<'a>(&self, s: &'a Sexp) -> Result<&'a str, ParseError> {
        s.as_symbol().ok_or_else(|| syntax(s, "expected a symbol"))
    }

    fn check_fresh(&self, s: &Sexp, name: &str) -> Result<(), ParseError> {
        if self.var_index.contains_key(name) || self.sig.is_reserved(name) {
            return Err(syntax(s, format!("symbol `{name}` is already declared")));
        }
        Ok(())
    }

    fn declare_var(&mut self, name: &Sexp, sort: &Sexp) -> Result<(), ParseError> {
        let n = self.symbol(name)?.to_string();
        self.check_fresh(name, &n)?;
        let sname = self.symbol(sort)?;
        let vs = if sname == "Int" {
            VarSort::Int
        } else {
            VarSort::Adt(self.sig.sort_id(sname).ok_or_else(|| unknown(sort, sname))?)
        };
        self.var_index.insert(n.clone(), vs);
        self.vars.push((n, vs));
        Ok(())
    }

    fn ctor_specs(&self, list: &Sexp) -> Result<Vec<CtorSpec>, ParseError> {
        let items = list
            .as_list()
            .ok_or_else(|| syntax(list, "expected a constructor list"))?;
        let mut out = Vec::new();
        for c in items {
            let spec = match &c.kind {
                SexpKind::Symbol(name) => CtorSpec {
                    name: name.clone(),
                    args: Vec::new(),
                },
                SexpKind::List(parts) if !parts.is_empty() => {
                    let name = self.symbol(&parts[0])?.to_string();
                    let mut args = Vec::new();
                    for sel in &parts[1..] {
                        match sel.as_list() {
                            Some([s, t]) => {
                                args.push((self.symbol(s)?.to_string(), self.symbol(t)?.to_string()))
                            }
                            _ => return Err(syntax(sel, "expected (selector Sort)")),
                        }
                    }
                    CtorSpec { name, args }
                }
                _ => return Err(syntax(c, "expected a constructor declaration")),
            };
            out.push(spec);
        }
        Ok(out)
    }

    fn add_sorts(&mut self, cmd: &Sexp, sorts: Vec<(String, Vec<CtorSpec>)>) -> Result<(), ParseError> {
        for (name, _) in &sorts {
            if name == "Int" || name == "Bool" || self.var_index.contains_key(name) {
                return Err(syntax(cmd, format!("symbol `{name}` is already declared")));
            }
        }
        let mut decl = self.decl.clone();
        decl.sorts.extend(sorts);
        match decl.validate() {
            Ok(sig) => {
                self.decl = decl;
                self.sig = sig;
                Ok(())
            }
            Err(errors) => Err(ParseError::Signature {
                line: cmd.pos.line,
                col: cmd.pos.col,
                errors,
            }),
        }
    }

    fn declare_datatypes(&mut self, cmd: &Sexp, items: &[Sexp]) -> Result<(), ParseError> {
        if items.len() != 3 {
            return Err(syntax(cmd, "expected (declare-datatypes (sorts) (constructors))"));
        }
        let heads = items[1]
            .as_list()
            .ok_or_else(|| syntax(&items[1], "expected sort declarations"))?;
        let bodies = items[2]
            .as_list()
            .ok_or_else(|| syntax(&items[2], "expected constructor lists"))?;
        if heads.len() != bodies.len() {
            return Err(syntax(cmd, "number of sorts and constructor lists differ"));
        }
        let mut sorts = Vec::new();
        for (h, b) in heads.iter().zip(bodies) {
            let (name, arity) = match h.as_list() {
                Some([n, a]) => (self.symbol(n)?, a.as_numeral()),
                _ => return Err(syntax(h, "expected (Sort 0)")),
            };
            if arity != Some("0") {
                return Err(syntax(h, "parametric datatypes are not supported"));
            }
            if b.head_symbol() == Some("par") {
                return Err(syntax(b, "parametric datatypes are not supported"));
            }
            sorts.push((name.to_string(), self.ctor_specs(b)?));
        }
        self.add_sorts(cmd, sorts)
    }

    fn declare_datatype(&mut self, cmd: &Sexp, items: &[Sexp]) -> Result<(), ParseError> {
        if items.len() != 3 {
            return Err(syntax(cmd, "expected (declare-datatype Sort (constructors))"));
        }
        let name = self.symbol(&items[1])?.to_string();
        let specs = self.ctor_specs(&items[2])?;
        self.add_sorts(cmd, vec![(name, specs)])
    }

    fn type_error(&self, s: &Sexp, v: &Value, expected: &str) -> ParseError {
        ParseError::Type {
            line: s.pos.line,
            col: s.pos.col,
            expr: s.to_string(),
            expected: expected.to_string(),
            found: v.type_name(&self.sig),
        }
    }

    fn formula(&self, s: &Sexp) -> Result<Formula, ParseError> {
        match self.value(s)? {
            Value::Bool(f) => Ok(f),
            v => Err(self.type_error(s, &v, "Bool")),
        }
    }

    fn term(&self, s: &Sexp) -> Result<Term, ParseError> {
        match self.value(s)? {
            Value::Term(t) => Ok(t),
            v => Err(self.type_error(s, &v, "a datatype sort")),
        }
    }

    fn int(&self, s: &Sexp) -> Result<IntExpr, ParseError> {
        match self.value(s)? {
            Value::Int(e) => Ok(e),
            v => Err(self.type_error(s, &v, "Int")),
        }
    }

    fn numeral(&self, s: &Sexp, n: &str) -> Result<i64, ParseError> {
        n.parse::<i64>()
            .map_err(|_| syntax(s, format!("numeral `{n}` out of range")))
    }

    fn value(&self, s: &Sexp) -> Result<Value, ParseError> {
        match &s.kind {
            SexpKind::Numeral(n) => Ok(Value::Int(IntExpr::Const(self.numeral(s, n)?))),
            SexpKind::Symbol(name) => self.symbol_value(s, name),
            SexpKind::List(items) if !items.is_empty() => self.application(s, items),
            _ => Err(syntax(s, "unexpected expression")),
        }
    }

    fn symbol_value(&self, s: &Sexp, name: &str) -> Result<Value, ParseError> {
        match name {
            "true" => return Ok(Value::Bool(Formula::True)),
            "false" => return Ok(Value::Bool(Formula::False)),
            _ => {}
        }
        if let Some(vs) = self.var_index.get(name) {
            return Ok(match vs {
                VarSort::Adt(sort) => Value::Term(Term::Var(name.to_string(), *sort)),
                VarSort::Int => Value::Int(IntExpr::Var(name.to_string())),
            });
        }
        if let Some(c) = self.sig.ctor_id(name) {
            if self.sig.ctor(c).arity() == 0 {
                return Ok(Value::Term(Term::Ctor(c, Vec::new())));
            }
            return Err(syntax(s, format!("constructor `{name}` expects arguments")));
        }
        Err(unknown(s, name))
    }

    fn tester_ctor(&self, head: &Sexp) -> Result<Option<crate::signature::CtorId>, ParseError> {
        if let Some([u, is, c]) = head.as_list() {
            if u.as_symbol() == Some("_") && is.as_symbol() == Some("is") {
                let name = self.symbol(c)?;
                return self
                    .sig
                    .ctor_id(name)
                    .map(Some)
                    .ok_or_else(|| unknown(c, name));
            }
        }
        if let Some(sym) = head.as_symbol() {
            if let Some(name) = sym.strip_prefix("is-") {
                if !self.var_index.contains_key(sym) && !self.sig.is_reserved(sym) {
                    if let Some(c) = self.sig.ctor_id(name) {
                        return Ok(Some(c));
                    }
                }
            }
        }
        Ok(None)
    }

    fn application(&self, s: &Sexp, items: &[Sexp]) -> Result<Value, ParseError> {
        let head = &items[0];
        let args = &items[1..];
        if let Some(c) = self.tester_ctor(head)? {
            if args.len() != 1 {
                return Err(syntax(s, "tester expects one argument"));
            }
            let t = self.term(&args[0])?;
            let expected = self.sig.ctor(c).sort;
            if t.sort(&self.sig) != expected {
                return Err(self.type_error(
                    &args[0],
                    &Value::Term(t),
                    self.sig.sort_name(expected),
                ));
            }
            return Ok(Value::Bool(Formula::Tester(c, t)));
        }
        let name = match head.as_symbol() {
            Some(n) => n,
            None => return Err(syntax(head, "expected a function symbol")),
        };
        match name {
            "as" => self.qualified(s, items),
            "not" => {
                if args.len() != 1 {
                    return Err(syntax(s, "`not` expects one argument"));
                }
                Ok(Value::Bool(Formula::not(self.formula(&args[0])?)))
            }
            "and" | "or" => {
                let fs = args
                    .iter()
                    .map(|a| self.formula(a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Value::Bool(if name == "and" {
                    Formula::And(fs)
                } else {
                    Formula::Or(fs)
                }))
            }
            "=>" => {
                if args.len() < 2 {
                    return Err(syntax(s, "`=>` expects at least two arguments"));
                }
                let fs = args
                    .iter()
                    .map(|a| self.formula(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut it = fs.into_iter().rev();
                let mut acc = it.next().expect("non-empty");
                for f in it {
                    acc = Formula::Implies(Box::new(f), Box::new(acc));
                }
                Ok(Value::Bool(acc))
            }
            "=" | "distinct" => self.equality(s, name == "distinct", args),
            "<=" | "<" | ">=" | ">" => {
                let op = match name {
                    "<=" => CmpOp::Le,
                    "<" => CmpOp::Lt,
                    ">=" => CmpOp::Ge,
                    _ => CmpOp::Gt,
                };
                if args.len() < 2 {
                    return Err(syntax(s, format!("`{name}` expects at least two arguments")));
                }
                let es = args
                    .iter()
                    .map(|a| self.int(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let atoms: Vec<Formula> = es
                    .windows(2)
                    .map(|w| Formula::IntCmp(op, w[0].clone(), w[1].clone()))
                    .collect();
                Ok(Value::Bool(single_or_and(atoms)))
            }
            "+" => {
                let es = args
                    .iter()
                    .map(|a| self.int(a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Value::Int(IntExpr::Add(es)))
            }
            "-" => {
                if args.is_empty() {
                    return Err(syntax(s, "`-` expects arguments"));
                }
                if args.len() == 1 {
                    if let Some(n) = args[0].as_numeral() {
                        return Ok(Value::Int(IntExpr::Const(-self.numeral(&args[0], n)?)));
                    }
                    return Ok(Value::Int(IntExpr::Mul(-1, Box::new(self.int(&args[0])?))));
                }
                let mut es = vec![self.int(&args[0])?];
                for a in &args[1..] {
                    es.push(IntExpr::Mul(-1, Box::new(self.int(a)?)));
                }
                Ok(Value::Int(IntExpr::Add(es)))
            }
            "*" => {
                if args.len() != 2 {
                    return Err(syntax(s, "`*` expects two arguments"));
                }
                let a = self.int(&args[0])?;
                let b = self.int(&args[1])?;
                match (a, b) {
                    (IntExpr::Const(c), e) => Ok(Value::Int(IntExpr::Mul(c, Box::new(e)))),
                    (e, IntExpr::Const(c)) => Ok(Value::Int(IntExpr::Mul(c, Box::new(e)))),
                    _ => Err(syntax(s, "non-linear multiplication")),
                }
            }
            "adt.size" => {
                if args.len() != 1 {
                    return Err(syntax(s, "`adt.size` expects one argument"));
                }
                Ok(Value::Int(IntExpr::Size(self.term(&args[0])?)))
            }
            _ => self.function(s, head, name, args),
        }
    }

    fn qualified(&self, s: &Sexp, items: &[Sexp]) -> Result<Value, ParseError> {
        match items {
            [_, ctor, sort] => {
                let name = self.symbol(ctor)?;
                let sname = self.symbol(sort)?;
                let c = self.sig.ctor_id(name).ok_or_else(|| unknown(ctor, name))?;
                let sid = self.sig.sort_id(sname).ok_or_else(|| unknown(sort, sname))?;
                if self.sig.ctor(c).sort != sid || self.sig.ctor(c).arity() != 0 {
                    return Err(syntax(s, format!("`{name}` is not a constant of sort {sname}")));
                }
                Ok(Value::Term(Term::Ctor(c, Vec::new())))
            }
            _ => Err(syntax(s, "expected (as constructor Sort)")),
        }
    }

    fn function(&self, s: &Sexp, head: &Sexp, name: &str, args: &[Sexp]) -> Result<Value, ParseError> {
        if let Some(c) = self.sig.ctor_id(name) {
            let decl = self.sig.ctor(c);
            if decl.arity() != args.len() {
                return Err(syntax(
                    s,
                    format!("`{name}` expects {} arguments, got {}", decl.arity(), args.len()),
                ));
            }
            let mut ts = Vec::new();
            for (a, slot) in args.iter().zip(&decl.args) {
                let t = self.term(a)?;
                if t.sort(&self.sig) != slot.sort {
                    return Err(self.type_error(a, &Value::Term(t), self.sig.sort_name(slot.sort)));
                }
                ts.push(t);
            }
            return Ok(Value::Term(Term::Ctor(c, ts)));
        }
        if let Some((c, j)) = self.sig.selector(name) {
            if args.len() != 1 {
                return Err(syntax(s, format!("selector `{name}` expects one argument")));
            }
            let t = self.term(&args[0])?;
            let expected = self.sig.ctor(c).sort;
            if t.sort(&self.sig) != expected {
                return Err(self.type_error(&args[0], &Value::Term(t), self.sig.sort_name(expected)));
            }
            return Ok(Value::Term(Term::Sel(c, j, Box::new(t))));
        }
        Err(unknown(head, name))
    }

    fn equality(&self, s: &Sexp, distinct: bool, args: &[Sexp]) -> Result<Value, ParseError> {
        if args.len() < 2 {
            return Err(syntax(s, "equality expects at least two arguments"));
        }
        let vals = args
            .iter()
            .map(|a| self.value(a))
            .collect::<Result<Vec<_>, _>>()?;
        let first_type = vals[0].type_name(&self.sig);
        for (a, v) in args.iter().zip(&vals).skip(1) {
            if v.type_name(&self.sig) != first_type {
                return Err(self.type_error(a, v, &first_type));
            }
        }
        let pairs: Vec<(usize, usize)> = if distinct {
            (0..vals.len())
                .flat_map(|i| (i + 1..vals.len()).map(move |j| (i, j)))
                .collect()
        } else {
            (0..vals.len() - 1).map(|i| (i, i + 1)).collect()
        };
        let mut atoms = Vec::new();
        for (i, j) in pairs {
            let atom = match (&vals[i], &vals[j]) {
                (Value::Term(a), Value::Term(b)) => Formula::Eq(a.clone(), b.clone()),
                (Value::Int(a), Value::Int(b)) => Formula::IntCmp(CmpOp::Eq, a.clone(), b.clone()),
                (Value::Bool(_), _) => {
                    return Err(syntax(s, "equality between formulas is not supported"))
                }
                _ => unreachable!("types checked above"),
            };
            atoms.push(if distinct { Formula::not(atom) } else { atom });
        }
        Ok(Value::Bool(single_or_and(atoms)))
    }
}

fn single_or_and(mut atoms: Vec<Formula>) -> Formula {
    if atoms.len() == 1 {
        atoms.pop().expect("one atom")
    } else {
        Formula::And(atoms)
    }
}

impl Signature {
    /// Name-based description of this signature.
    pub fn to_decl(&self) -> SignatureDecl {
        SignatureDecl {
            sorts: self
                .sorts()
                .map(|s| {
                    let ctors = self
                        .ctors_of(s)
                        .iter()
                        .map(|&c| {
                            let d = self.ctor(c);
                            CtorSpec {
                                name: d.name.clone(),
                                args: d
                                    .args
                                    .iter()
                                    .map(|a| (a.name.clone(), self.sort_name(a.sort).to_string()))
                                    .collect(),
                            }
                        })
                        .collect();
                    (self.sort_name(s).to_string(), ctors)
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTS: &str = "(declare-datatypes ((Colour 0) (CList 0)) \
        (((red) (green) (blue)) ((nil) (cons (head Colour) (tail CList)))))\n\
        (declare-const x CList)\n(declare-const y Colour)\n";

    fn parse_ok(body: &str) -> Script {
        parse(&format!("{LISTS}{body}")).unwrap()
    }

    #[test]
    fn parses_constructor_equation() {
        let s = parse_ok("(assert (= x (cons y nil)))");
        let sig = &s.sig;
        let x = Term::var("x", sig.sort_id("CList").unwrap());
        let y = Term::var("y", sig.sort_id("Colour").unwrap());
        let cons = sig.ctor_id("cons").unwrap();
        let nil = sig.ctor_id("nil").unwrap();
        assert_eq!(
            s.assertions,
            vec![Formula::Eq(x, Term::Ctor(cons, vec![y, Term::Ctor(nil, vec![])]))]
        );
    }

    #[test]
    fn parses_tester_and_size() {
        let s = parse_ok("(assert ((_ is cons) x))\n(assert (= (adt.size x) 3))");
        let sig = &s.sig;
        let x = Term::var("x", sig.sort_id("CList").unwrap());
        assert_eq!(s.assertions[0], Formula::Tester(sig.ctor_id("cons").unwrap(), x.clone()));
        assert_eq!(
            s.assertions[1],
            Formula::IntCmp(CmpOp::Eq, IntExpr::Size(x), IntExpr::Const(3))
        );
    }

    #[test]
    fn reports_positioned_errors() {
        let err = parse(&format!("{LISTS}(assert (= x y))")).unwrap_err();
        assert!(matches!(err.0[0], ParseError::Type { line: 4, .. }), "{err}");
        let err = parse(&format!("{LISTS}(assert (= x z))")).unwrap_err();
        assert!(
            matches!(&err.0[0], ParseError::UnknownSymbol { name, .. } if name == "z"),
            "{err}"
        );
        let err = parse("(assert (= x y)").unwrap_err();
        assert!(matches!(err.0[0], ParseError::Syntax { line: 1, col: 1, .. }));
        let err = parse("(declare-datatype S ((f (s S))))").unwrap_err();
        assert!(matches!(&err.0[0], ParseError::Signature { errors, .. }
            if errors == &vec![SignatureError::EmptySort("S".into())]));
    }

    #[test]
    fn print_parse_round_trip() {
        let text = "(assert (and ((_ is cons) x) (not (= y blue)) (or (= (head x) red) (= x (cons y nil)))))\n\
            (assert (<= (+ (adt.size x) (* 2 (adt.size y))) (- 7)))\n(check-sat)\n(get-model)\n";
        let s = parse_ok(text);
        let printed = super::super::print_script(&s);
        let again = parse(&printed).unwrap();
        assert_eq!(s, again);
        assert!(printed.contains("(assert (and ((_ is cons) x) (not (= y blue))"));
    }

    #[test]
    fn parse_with_reuses_declarations() {
        let a = parse_ok("(assert ((_ is nil) x))");
        let b = parse_with("(declare-const c Colour)\n(assert (= x (cons c nil)))", &a).unwrap();
        assert_eq!(b.vars.len(), 3);
        assert_eq!(b.assertions.len(), 1);
    }
}
