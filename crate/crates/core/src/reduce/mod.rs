//! Translation of flat ADT formulas into EUF+LIA.
//!
//! Every ADT variable `x` becomes an integer variable of the same name,
//! every constructor and selector an uninterpreted integer function of the
//! same name and arity, and each sort `S` gets functions `ctorId_S` and,
//! depending on the mode, `depth_S` (acyclicity only) or `size_S` (exact
//! term size).

mod shape;
mod simplify;

pub use shape::check_utvpi;
pub use simplify::simplify;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::ast::{CmpOp, VarSort};
use crate::normalize::{taken_names, ArithOp, Flat, FlatFormula, FlatLit, NameGen};
use crate::reduced::{
    AtomKey, FunOrigin, ITerm, Lin, RFormula, SymbolTable, VarInfo, VarOrigin,
};
use crate::signature::{Cardinality, CtorId, Signature, SortId};

/// Which measure enforces acyclicity of terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `depth_S` functions; no size atoms allowed.
    Depth,
    /// `size_S` functions with exact sizes and size-image constraints.
    Size,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Map enumeration sorts to constructor indices directly.
    pub enum_opt: bool,
    /// Drop the constructor case split of guarded selector literals.
    pub guarded_opt: bool,
    /// Prefix of Skolem constants.
    pub skolem_prefix: String,
    /// Prefix of size-image multipliers.
    pub aux_prefix: String,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            enum_opt: true,
            guarded_opt: true,
            skolem_prefix: "_s".into(),
            aux_prefix: "_k".into(),
        }
    }
}

impl ReduceOptions {
    /// Plain reduction without optimizations.
    pub fn unoptimized() -> Self {
        ReduceOptions {
            enum_opt: false,
            guarded_opt: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("size constraint on `{0}` cannot be reduced in depth mode")]
    ModeMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedFormula {
    pub formula: RFormula,
    pub table: SymbolTable,
    pub mode: Mode,
    pub options: ReduceOptions,
    /// Reduction of every flat literal, in [`Flat::literals`] order.
    pub literals: Vec<RFormula>,
}

impl ReducedFormula {
    pub fn node_count(&self) -> usize {
        self.formula.node_count()
    }
}

pub fn ctor_id_fn(sig: &Signature, s: SortId) -> String {
    format!("ctorId_{}", sig.sort_name(s))
}

pub fn depth_fn(sig: &Signature, s: SortId) -> String {
    format!("depth_{}", sig.sort_name(s))
}

pub fn size_fn(sig: &Signature, s: SortId) -> String {
    format!("size_{}", sig.sort_name(s))
}

struct Reducer<'a> {
    sig: &'a Signature,
    mode: Mode,
    opts: &'a ReduceOptions,
    skolems: NameGen,
    aux: NameGen,
    table: SymbolTable,
    ex_memo: HashMap<(CtorId, String), Vec<String>>,
    member_memo: HashMap<ITerm, RFormula>,
    literals: Vec<RFormula>,
}

impl Reducer<'_> {
    fn fun(&mut self, name: String, arity: usize, origin: FunOrigin) -> String {
        self.table.funs.insert(name.clone(), (arity, origin));
        name
    }

    fn ctor_app(&mut self, c: CtorId, args: &[String]) -> ITerm {
        let name = self.fun(self.sig.ctor_name(c).to_string(), args.len(), FunOrigin::Ctor(c));
        ITerm::App(name, args.iter().map(|a| ITerm::var(a)).collect())
    }

    fn sel_app(&mut self, c: CtorId, j: usize, x: &str) -> ITerm {
        let name = self.fun(
            self.sig.selector_name(c, j).to_string(),
            1,
            FunOrigin::Sel(c, j),
        );
        ITerm::App(name, vec![ITerm::var(x)])
    }

    fn unary(&mut self, origin: FunOrigin, x: &str) -> ITerm {
        let name = match origin {
            FunOrigin::CtorIdOf(s) => ctor_id_fn(self.sig, s),
            FunOrigin::Depth(s) => depth_fn(self.sig, s),
            FunOrigin::Size(s) => size_fn(self.sig, s),
            _ => unreachable!("unary measure functions only"),
        };
        let name = self.fun(name, 1, origin);
        ITerm::App(name, vec![ITerm::var(x)])
    }

    /// `In_S(x)`: range constraint for finite sorts.
    fn in_sort(&self, x: &str, s: SortId) -> Vec<RFormula> {
        match self.sig.cardinality(s) {
            Cardinality::Finite(n) => {
                let mut v = vec![RFormula::cmp(CmpOp::Le, Lin::constant(0), Lin::var(x))];
                if let Ok(n) = i64::try_from(n) {
                    v.push(RFormula::cmp(CmpOp::Lt, Lin::var(x), Lin::constant(n)));
                }
                v
            }
            Cardinality::Infinite => Vec::new(),
        }
    }

    /// `t in S_s`, encoded without modulo: exceptions as equalities and each
    /// residue class as `t >= threshold & t = first + period * k & k >= 0`.
    fn member(&mut self, t: ITerm, s: SortId) -> RFormula {
        if let Some(f) = self.member_memo.get(&t) {
            return f.clone();
        }
        let image = self.sig.size_image(s).clone();
        let lin = Lin::term(t.clone());
        let mut cases: Vec<RFormula> = image
            .exceptions()
            .iter()
            .map(|&a| RFormula::cmp(CmpOp::Eq, lin.clone(), Lin::constant(a as i64)))
            .collect();
        let (thr, p) = (image.threshold() as i64, image.period() as i64);
        for &r in image.residues() {
            let at_least = RFormula::cmp(CmpOp::Ge, lin.clone(), Lin::constant(thr));
            if p == 1 {
                cases.push(at_least);
                continue;
            }
            let r = r as i64;
            let first = thr + (r - thr).rem_euclid(p);
            let k = self.aux.fresh();
            self.table.vars.insert(
                k.clone(),
                VarInfo {
                    sort: VarSort::Int,
                    origin: VarOrigin::Aux,
                },
            );
            cases.push(RFormula::And(vec![
                at_least,
                RFormula::cmp(
                    CmpOp::Eq,
                    lin.clone(),
                    Lin::sum(vec![(p, ITerm::var(&k))], first),
                ),
                RFormula::cmp(CmpOp::Ge, Lin::var(&k), Lin::constant(0)),
            ]));
        }
        let f = RFormula::or(cases);
        self.member_memo.insert(t, f.clone());
        f
    }

    /// Conjuncts of `CtorSpec_f(x0, args)` (or `CtorSpec'_f` in size mode),
    /// with `extra` inserted before the measure constraints.
    fn ctor_spec(&mut self, f: CtorId, x0: &str, args: &[String], extra: Vec<RFormula>) -> Vec<RFormula> {
        let d = self.sig.ctor(f).clone();
        let s0 = d.sort;
        let mut out = Vec::new();
        let app = self.ctor_app(f, args);
        out.push(RFormula::eq(app, ITerm::var(x0)));
        let cid = self.unary(FunOrigin::CtorIdOf(s0), x0);
        out.push(RFormula::eq(cid, ITerm::Const(self.sig.ctor_index(f) as i64)));
        for (j, a) in args.iter().enumerate() {
            let sel = self.sel_app(f, j, x0);
            out.push(RFormula::eq(sel, ITerm::var(a)));
        }
        out.extend(extra);
        match self.mode {
            Mode::Depth => {
                for (j, a) in args.iter().enumerate() {
                    let parent = self.unary(FunOrigin::Depth(s0), x0);
                    let child = self.unary(FunOrigin::Depth(d.args[j].sort), a);
                    out.push(RFormula::cmp(CmpOp::Gt, Lin::term(parent), Lin::term(child)));
                }
            }
            Mode::Size => {
                let mut sum = Vec::new();
                for (j, a) in args.iter().enumerate() {
                    let sj = d.args[j].sort;
                    let child = self.unary(FunOrigin::Size(sj), a);
                    out.push(self.member(child.clone(), sj));
                    sum.push((1, child));
                }
                let parent = self.unary(FunOrigin::Size(s0), x0);
                out.push(RFormula::cmp(CmpOp::Eq, Lin::term(parent), Lin::sum(sum, 1)));
            }
        }
        out
    }

    /// `ExCtorSpec_f(x)` with Skolemized arguments; repeated instances for
    /// the same constructor and variable share their Skolem constants.
    fn ex_ctor_spec(&mut self, f: CtorId, x: &str) -> RFormula {
        let arg_sorts: Vec<SortId> = self.sig.ctor(f).args.iter().map(|a| a.sort).collect();
        let key = (f, x.to_string());
        let args = match self.ex_memo.get(&key) {
            Some(a) => a.clone(),
            None => {
                let a: Vec<String> = arg_sorts.iter().map(|_| self.skolems.fresh()).collect();
                for (n, s) in a.iter().zip(&arg_sorts) {
                    self.table.vars.insert(
                        n.clone(),
                        VarInfo {
                            sort: VarSort::Adt(*s),
                            origin: VarOrigin::Skolem,
                        },
                    );
                }
                self.ex_memo.insert(key, a.clone());
                a
            }
        };
        let ins: Vec<RFormula> = args
            .iter()
            .zip(&arg_sorts)
            .flat_map(|(n, s)| self.in_sort(n, *s))
            .collect();
        RFormula::and(self.ctor_spec(f, x, &args, ins))
    }

    fn cases(&mut self, s: SortId, x: &str, except: Option<CtorId>) -> RFormula {
        let ctors: Vec<CtorId> = self
            .sig
            .ctors_of(s)
            .iter()
            .copied()
            .filter(|&g| Some(g) != except)
            .collect();
        if ctors.is_empty() {
            return RFormula::Or(Vec::new());
        }
        let parts = ctors.into_iter().map(|g| self.ex_ctor_spec(g, x)).collect();
        RFormula::or(parts)
    }

    fn sort_of(&self, x: &str) -> SortId {
        self.table.adt_sort(x).expect("ADT variable")
    }

    fn literal(&mut self, lit: &FlatLit, guards: &BTreeSet<String>) -> Result<RFormula, ReduceError> {
        Ok(match lit {
            // constructor literal
            FlatLit::Ctor { ctor, args, result } => {
                RFormula::and(self.ctor_spec(*ctor, result, args, Vec::new()))
            }
            // selector literal; guarded ones skip the case split
            FlatLit::Sel {
                ctor,
                index,
                arg,
                result,
            } => {
                let sel = self.sel_app(*ctor, *index, arg);
                let eq = RFormula::eq(sel, ITerm::var(result));
                if self.opts.guarded_opt && guards.contains(arg) {
                    eq
                } else {
                    let s = self.sort_of(arg);
                    RFormula::And(vec![eq, self.cases(s, arg, None)])
                }
            }
            // tester literal
            FlatLit::Tester {
                ctor,
                var,
                positive,
            } => {
                if *positive {
                    self.ex_ctor_spec(*ctor, var)
                } else {
                    let s = self.sort_of(var);
                    self.cases(s, var, Some(*ctor))
                }
            }
            // variable (dis)equality
            FlatLit::VarEq { lhs, rhs, positive } => {
                let eq = RFormula::eq(ITerm::var(lhs), ITerm::var(rhs));
                if *positive {
                    eq
                } else {
                    RFormula::not(eq)
                }
            }
            // size literal
            FlatLit::SizeEq { var, int_var } => {
                if self.mode == Mode::Depth {
                    return Err(ReduceError::ModeMismatch(var.clone()));
                }
                let s = self.sort_of(var);
                let size = self.unary(FunOrigin::Size(s), var);
                let member = self.member(ITerm::var(int_var), s);
                RFormula::And(vec![RFormula::eq(size, ITerm::var(int_var)), member])
            }
            FlatLit::Arith { expr, op, positive } => {
                let lin = Lin::sum(
                    expr.coeffs
                        .iter()
                        .map(|(v, c)| (*c, ITerm::var(v)))
                        .collect(),
                    expr.constant,
                );
                let op = match op {
                    ArithOp::Eq => CmpOp::Eq,
                    ArithOp::Le => CmpOp::Le,
                    ArithOp::Lt => CmpOp::Lt,
                };
                let atom = RFormula::cmp(op, lin, Lin::constant(0));
                if *positive {
                    atom
                } else {
                    RFormula::not(atom)
                }
            }
        })
    }

    fn walk(&mut self, f: &Flat, guards: &BTreeSet<String>) -> Result<RFormula, ReduceError> {
        Ok(match f {
            Flat::True => RFormula::True,
            Flat::False => RFormula::False,
            Flat::Lit(l) => {
                let r = self.literal(l, guards)?;
                self.literals.push(r.clone());
                r
            }
            Flat::And(xs) => {
                let mut inner = guards.clone();
                collect_guards(xs, &mut inner);
                RFormula::And(
                    xs.iter()
                        .map(|x| self.walk(x, &inner))
                        .collect::<Result<_, _>>()?,
                )
            }
            Flat::Or(xs) => RFormula::Or(
                xs.iter()
                    .map(|x| self.walk(x, guards))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
}

/// Variables guarded by a tester or constructor literal in a conjunction.
fn collect_guards(xs: &[Flat], out: &mut BTreeSet<String>) {
    for x in xs {
        match x {
            Flat::Lit(FlatLit::Tester { var, .. }) => {
                out.insert(var.clone());
            }
            Flat::Lit(FlatLit::Ctor { result, .. }) => {
                out.insert(result.clone());
            }
            Flat::And(ys) => collect_guards(ys, out),
            _ => {}
        }
    }
}

/// Reduces a flat NNF formula literal by literal, with size literals and
/// `CtorSpec'` in size mode, and conjoins `In_S(x)` for every ADT variable.
pub fn reduce(
    sig: &Signature,
    flat: &FlatFormula,
    mode: Mode,
    opts: &ReduceOptions,
) -> Result<ReducedFormula, ReduceError> {
    let mut taken = taken_names(sig, flat.vars.keys().cloned());
    for s in sig.sorts() {
        taken.insert(ctor_id_fn(sig, s));
        taken.insert(depth_fn(sig, s));
        taken.insert(size_fn(sig, s));
    }
    let mut table = SymbolTable::default();
    for (v, s) in &flat.vars {
        let origin = if flat.source_vars.contains(v) {
            VarOrigin::Source
        } else {
            VarOrigin::Fresh
        };
        table.vars.insert(v.clone(), VarInfo { sort: *s, origin });
    }
    let mut r = Reducer {
        sig,
        mode,
        opts,
        skolems: NameGen::new(&opts.skolem_prefix, taken.clone()),
        aux: NameGen::new(&opts.aux_prefix, taken),
        table,
        ex_memo: HashMap::new(),
        member_memo: HashMap::new(),
        literals: Vec::new(),
    };
    let body = r.walk(&flat.root, &BTreeSet::new())?;
    let mut conj = match body {
        RFormula::And(xs) => xs,
        other => vec![other],
    };
    let fresh: Vec<&String> = flat.fresh.iter().map(|(n, _)| n).collect();
    let mut order: Vec<&String> = flat.vars.keys().filter(|v| !fresh.contains(v)).collect();
    order.extend(fresh);
    for v in order {
        if let VarSort::Adt(s) = flat.vars[v] {
            conj.extend(r.in_sort(v, s));
        }
    }
    let mut reduct = ReducedFormula {
        formula: RFormula::and(conj),
        table: r.table,
        mode,
        options: ReduceOptions {
            enum_opt: false,
            ..opts.clone()
        },
        literals: r.literals,
    };
    if opts.enum_opt {
        reduct = apply_opt_enum(&reduct, sig);
    }
    Ok(reduct)
}

/// `reduce(to_nnf-flattened formula)` with the default names.
pub fn reduce_formula(
    sig: &Signature,
    f: &crate::ast::Formula,
    mode: Mode,
    opts: &ReduceOptions,
) -> Result<(FlatFormula, ReducedFormula), ReduceError> {
    let flat = crate::normalize::normalize(sig, f);
    let red = reduce(sig, &flat, mode, opts)?;
    Ok((flat, red))
}

/// Re-reduces `flat` with guarded selector literals translated without a case split.
pub fn apply_opt_guarded(
    sig: &Signature,
    reduct: &ReducedFormula,
    flat: &FlatFormula,
) -> Result<ReducedFormula, ReduceError> {
    let opts = ReduceOptions {
        guarded_opt: true,
        enum_opt: reduct.options.enum_opt,
        ..reduct.options.clone()
    };
    reduce(sig, flat, reduct.mode, &opts)
}

/// Terms of enumeration sorts are represented by their
/// constructor index. Constructor applications become constants,
/// `ctorId_S(t)` becomes `t`, and the measure of such terms is fixed
/// (depth 0, size 1).
pub fn apply_opt_enum(reduct: &ReducedFormula, sig: &Signature) -> ReducedFormula {
    let enums: BTreeSet<SortId> = sig.sorts().filter(|&s| sig.is_enum(s)).collect();
    let table = &reduct.table;
    let mut rewrite = |t: ITerm| -> ITerm {
        let ITerm::App(name, mut args) = t else { return t };
        match table.fun_origin(&name) {
            Some(FunOrigin::Ctor(c)) if enums.contains(&sig.ctor(c).sort) => {
                ITerm::Const(sig.ctor_index(c) as i64)
            }
            Some(FunOrigin::CtorIdOf(s)) if enums.contains(&s) => args.pop().expect("unary"),
            Some(FunOrigin::Depth(s)) if enums.contains(&s) => ITerm::Const(0),
            Some(FunOrigin::Size(s)) if enums.contains(&s) => ITerm::Const(1),
            _ => ITerm::App(name, args),
        }
    };
    let formula = tidy(&reduct.formula.map_terms(&mut rewrite));
    let literals = reduct
        .literals
        .iter()
        .map(|l| tidy(&l.map_terms(&mut rewrite)))
        .collect();
    let mut table = reduct.table.clone();
    table.funs.retain(|_, (_, o)| match *o {
        FunOrigin::Ctor(c) => !enums.contains(&sig.ctor(c).sort),
        FunOrigin::CtorIdOf(s) | FunOrigin::Depth(s) | FunOrigin::Size(s) => !enums.contains(&s),
        FunOrigin::Sel(..) => true,
    });
    table.enum_sorts = enums;
    ReducedFormula {
        formula,
        table,
        mode: reduct.mode,
        options: ReduceOptions {
            enum_opt: true,
            ..reduct.options.clone()
        },
        literals,
    }
}

/// Drops constant-true conjuncts and duplicate conjuncts left behind by
/// rewriting; the connective structure is otherwise kept.
fn tidy(f: &RFormula) -> RFormula {
    match f {
        RFormula::And(xs) => {
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for x in xs {
                let x = tidy(x);
                if let RFormula::Cmp(op, a, b) = &x {
                    let key = AtomKey::new(*op, a, b);
                    if key.constant_value() == Some(true) || !seen.insert(key) {
                        continue;
                    }
                }
                out.push(x);
            }
            if out.is_empty() {
                RFormula::True
            } else {
                RFormula::and(out)
            }
        }
        RFormula::Or(xs) => RFormula::Or(xs.iter().map(tidy).collect()),
        RFormula::Not(x) => RFormula::not(tidy(x)),
        other => other.clone(),
    }
}

/// Counts of reduced symbols per origin kind, for statistics.
pub fn symbol_summary(reduct: &ReducedFormula) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for (_, o) in reduct.table.funs.values() {
        let k = match o {
            FunOrigin::Ctor(_) => "constructors",
            FunOrigin::Sel(..) => "selectors",
            FunOrigin::CtorIdOf(_) => "ctorId",
            FunOrigin::Depth(_) => "depth",
            FunOrigin::Size(_) => "size",
        };
        *out.entry(k).or_insert(0) += 1;
    }
    let skolems = reduct
        .table
        .vars
        .values()
        .filter(|v| v.origin == VarOrigin::Skolem)
        .count();
    out.insert("skolems", skolems);
    out
}

#[cfg(test)]
mod tests;
