//! Craig interpolation: both partitions are reduced separately in size
//! mode, an external solver computes an EUF+LIA interpolant of the
//! reducts, and the result is translated back to testers, constructors,
//! selectors and sizes.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use thiserror::Error;

use crate::ast::{CmpOp, Formula, IntExpr, Term, VarSort};
use crate::backend::external::run;
use crate::backend::smtlib::{declarations, parse_formula, term_to_string};
use crate::backend::{solve_formula, SolverError, SolverResult};
use crate::normalize::{flatten_with, to_nnf};
use crate::pipeline::{decide, DecideConfig, DecideError, Verdict};
use crate::reduce::{reduce, Mode, ReduceError, ReduceOptions, ReducedFormula};
use crate::reduced::{FunOrigin, ITerm, Lin, RFormula, SymbolTable, VarOrigin};
use crate::sexp::parse_all;
use crate::signature::{Signature, SortId};

/// Environment variable naming the interpolating solver command.
pub const INTERP_ENV: &str = "ADT_REDUCE_INTERP";

/// Most value combinations a back-translated atom may expand into.
const MAX_CASES: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpolationProblem {
    pub a: Formula,
    pub b: Formula,
}

impl InterpolationProblem {
    pub fn new(a: Formula, b: Formula) -> Self {
        InterpolationProblem { a, b }
    }

    /// Variables occurring in both partitions.
    pub fn shared(&self) -> BTreeSet<(String, VarSort)> {
        let b = self.b.free_vars();
        self.a.free_vars().into_iter().filter(|v| b.contains(v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InterpResult {
    /// A verified interpolant over the shared variables.
    Interpolant(Formula),
    /// `A & B` is satisfiable; a model of it.
    NotUnsat(crate::ast::AdtModel),
    /// The reduced interpolant has no ADT counterpart.
    Untranslatable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("backend does not produce interpolants: {0}")]
    BackendUnsupported(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error("satisfiability of A & B is undecided: {0}")]
    Undecided(String),
    #[error("A & B is refuted only after unfolding, which interpolation does not support")]
    NeedsUnfolding,
    #[error("backend returned an invalid interpolant: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct InterpConfig {
    pub decide: DecideConfig,
    /// Budget of the interpolation query.
    pub timeout: Duration,
}

impl Default for InterpConfig {
    fn default() -> Self {
        InterpConfig {
            decide: DecideConfig::default(),
            timeout: Duration::from_secs(60),
        }
    }
}

/// Size-mode reduct of one partition with partition-local fresh names.
fn reduce_part(sig: &Signature, f: &Formula, tag: char, opts: &ReduceOptions) -> Result<ReducedFormula, ReduceError> {
    let flat = flatten_with(sig, &to_nnf(f), &format!("_t{tag}"));
    let opts = ReduceOptions {
        skolem_prefix: format!("_s{tag}"),
        aux_prefix: format!("_k{tag}"),
        ..opts.clone()
    };
    reduce(sig, &flat, Mode::Size, &opts)
}

/// The interpolation query for `a & b`, optionally restricted to a
/// SyGuS grammar.
pub fn interpolation_script(a: &RFormula, b: &RFormula, grammar: Option<&str>) -> String {
    let both = RFormula::And(vec![a.clone(), b.clone()]);
    format!(
        "(set-logic QF_UFLIA)\n(set-option :produce-interpolants true)\n{}(assert {})\n(get-interpolant _I (not {}){})\n",
        declarations(&both),
        term_to_string(a),
        term_to_string(b),
        grammar.map(|g| format!(" {g}")).unwrap_or_default()
    )
}

/// Grammar nonterminal -> productions: a head applied to nonterminals.
type Rules = BTreeMap<String, Vec<(String, Vec<String>)>>;

/// Typed grammars over the shared vocabulary of `a` and `b`, smallest
/// first: equations over selectors, then testers and constructors, then
/// sizes and linear arithmetic. Each ADT sort has its own nonterminal.
pub fn grammars(sig: &Signature, a: &RFormula, b: &RFormula, table: &SymbolTable) -> Vec<String> {
    let vb = b.vars();
    let vars: Vec<String> = a.vars().into_iter().filter(|v| vb.contains(v)).collect();
    let fb = b.functions();
    let funs: Vec<(String, usize, FunOrigin)> = a
        .functions()
        .into_iter()
        .filter(|(f, _)| fb.contains_key(f))
        .filter_map(|(f, k)| table.fun_origin(&f).map(|o| (f, k, o)))
        .collect();
    let mut consts: BTreeSet<i64> = BTreeSet::from([0, 1]);
    for f in [a, b] {
        f.visit_atoms(&mut |_, x, y| {
            for l in [x, y] {
                consts.insert(l.constant.abs());
                consts.extend(l.terms.iter().map(|(k, _)| k.abs()));
            }
        });
    }
    let nt = |s: SortId| format!("_A{}", s.0);
    let selectors = funs.iter().any(|(_, _, o)| matches!(o, FunOrigin::Sel(..)));
    (1..=3)
        .filter(|&stage| stage > 1 || selectors)
        .filter_map(|stage| {
            // nonterminal -> productions with the nonterminals they use
            let mut rules = Rules::new();
            let add = |rules: &mut Rules, n: String, rule: String, uses: Vec<String>| {
                rules.entry(n).or_default().push((rule, uses))
            };
            for v in &vars {
                match table.vars.get(v).map(|i| i.sort) {
                    Some(VarSort::Adt(s)) => add(&mut rules, nt(s), v.clone(), vec![]),
                    Some(VarSort::Int) if stage >= 3 => add(&mut rules, "_N".into(), v.clone(), vec![]),
                    _ => {}
                }
            }
            let mut ids = 0;
            for (f, _, o) in &funs {
                match *o {
                    FunOrigin::Sel(c, j) => {
                        let arg = nt(sig.ctor(c).sort);
                        add(&mut rules, nt(sig.ctor(c).args[j].sort), f.clone(), vec![arg]);
                    }
                    FunOrigin::Ctor(c) if stage >= 2 => {
                        let uses: Vec<String> = sig.ctor(c).args.iter().map(|x| nt(x.sort)).collect();
                        add(&mut rules, nt(sig.ctor(c).sort), f.clone(), uses);
                    }
                    FunOrigin::CtorIdOf(s) if stage >= 2 => {
                        ids = ids.max(sig.num_ctors(s));
                        add(&mut rules, "_N".into(), f.clone(), vec![nt(s)]);
                    }
                    FunOrigin::Size(s) if stage >= 3 => {
                        add(&mut rules, "_N".into(), f.clone(), vec![nt(s)]);
                    }
                    _ => {}
                }
            }
            if stage >= 2 {
                for &e in &table.enum_sorts {
                    for k in 0..sig.num_ctors(e) {
                        add(&mut rules, nt(e), k.to_string(), vec![]);
                    }
                }
                let mut nums: BTreeSet<i64> = (0..ids as i64).collect();
                if stage >= 3 {
                    nums.extend(consts.iter().copied());
                    add(&mut rules, "_N".into(), "+".into(), vec!["_N".into(), "_N".into()]);
                }
                for k in nums {
                    add(&mut rules, "_N".into(), k.to_string(), vec![]);
                }
            }
            let sorts: Vec<String> = rules.keys().cloned().collect();
            for n in sorts {
                add(&mut rules, "_B".into(), "=".into(), vec![n.clone(), n.clone()]);
                if stage >= 3 && n == "_N" {
                    add(&mut rules, "_B".into(), "<=".into(), vec![n.clone(), n.clone()]);
                }
            }
            add(&mut rules, "_B".into(), "not".into(), vec!["_B".into()]);
            if stage >= 2 {
                for op in ["and", "or"] {
                    add(&mut rules, "_B".into(), op.into(), vec!["_B".into(), "_B".into()]);
                }
            }
            // keep the nonterminals that derive some term over a shared
            // variable; constant-only nonterminals stall the enumeration
            let fixpoint = |step: &dyn Fn(&BTreeSet<String>, &[(String, Vec<String>)]) -> bool| {
                let mut out: BTreeSet<String> = BTreeSet::new();
                loop {
                    let before = out.len();
                    for (n, rs) in &rules {
                        if step(&out, rs) {
                            out.insert(n.clone());
                        }
                    }
                    if out.len() == before {
                        return out;
                    }
                }
            };
            let ground = fixpoint(&|done, rs| rs.iter().any(|(_, uses)| uses.iter().all(|u| done.contains(u))));
            let relevant = fixpoint(&|done, rs| {
                rs.iter().any(|(head, uses)| {
                    (uses.is_empty() && vars.contains(head)) || uses.iter().any(|u| done.contains(u))
                })
            });
            let live: BTreeSet<String> = ground.intersection(&relevant).cloned().collect();
            if !live.contains("_B") {
                return None;
            }
            // nonterminals with a single leaf are written out in place
            let inline: BTreeMap<&String, &String> = rules
                .iter()
                .filter(|(n, rs)| *n != "_B" && rs.len() == 1 && rs[0].1.is_empty())
                .map(|(n, rs)| (n, &rs[0].0))
                .collect();
            let mut order: Vec<&String> = vec![rules.get_key_value("_B").expect("boolean rules").0];
            order.extend(
                rules
                    .keys()
                    .filter(|n| *n != "_B" && live.contains(*n) && !inline.contains_key(n)),
            );
            let kind = |n: &str| if n == "_B" { "Bool" } else { "Int" };
            let decls: Vec<String> = order.iter().map(|n| format!("({n} {})", kind(n))).collect();
            let bodies: Vec<String> = order
                .iter()
                .map(|n| {
                    let rs: Vec<String> = rules[*n]
                        .iter()
                        .filter(|(_, uses)| uses.iter().all(|u| live.contains(u)))
                        .map(|(head, uses)| {
                            if uses.is_empty() {
                                return head.clone();
                            }
                            let args: Vec<&str> =
                                uses.iter().map(|u| inline.get(u).copied().unwrap_or(u).as_str()).collect();
                            format!("({head} {})", args.join(" "))
                        })
                        .collect();
                    format!("({n} {} ({}))", kind(n), rs.join(" "))
                })
                .collect();
            Some(format!("({}) ({})", decls.join(" "), bodies.join(" ")))
        })
        .collect()
}

/// Reads the body of `(define-fun _I () Bool body)` from solver output.
fn read_interpolant(out: &str, funs: &BTreeMap<String, usize>) -> Result<RFormula, InterpError> {
    let items = parse_all(out).map_err(|e| InterpError::BackendUnsupported(format!("{e}: {out}")))?;
    for it in &items {
        if it.head_symbol() == Some("define-fun") {
            if let Some(body) = it.as_list().and_then(|l| l.get(4)) {
                return parse_formula(body, funs).map_err(InterpError::BackendUnsupported);
            }
        }
    }
    Err(InterpError::BackendUnsupported(out.trim().to_string()))
}

/// Computes an interpolant of `prob` with the interpolating solver
/// `backend_cmd`; the result is verified before it is returned.
pub fn interpolate(
    prob: &InterpolationProblem,
    sig: &Signature,
    backend_cmd: &str,
    cfg: &InterpConfig,
) -> Result<InterpResult, InterpError> {
    let ra = reduce_part(sig, &prob.a, 'a', &cfg.decide.reduce)?;
    let rb = reduce_part(sig, &prob.b, 'b', &cfg.decide.reduce)?;
    let both = RFormula::And(vec![ra.formula.clone(), rb.formula.clone()]);
    if !matches!(solve_formula(&both, &cfg.decide.solver)?, SolverResult::Unsat) {
        let conj = Formula::And(vec![prob.a.clone(), prob.b.clone()]);
        return match decide(sig, &conj, &cfg.decide)?.verdict {
            Verdict::Sat(m) => Ok(InterpResult::NotUnsat(m)),
            Verdict::Unsat => Err(InterpError::NeedsUnfolding),
            Verdict::Unknown(why) => Err(InterpError::Undecided(why)),
        };
    }
    let table = merge_tables(&ra.table, &rb.table);
    let funs: BTreeMap<String, usize> = table.funs.iter().map(|(n, (k, _))| (n.clone(), *k)).collect();
    // small grammars with short budgets first, then the solver's own
    let mut attempts: Vec<(Option<String>, Duration)> = grammars(sig, &ra.formula, &rb.formula, &table)
        .into_iter()
        .zip([1, 2, 4])
        .map(|(g, k)| (Some(g), cfg.timeout * k / 32))
        .collect();
    attempts.push((None, cfg.timeout * 25 / 32));
    let mut out = None;
    for (g, budget) in attempts {
        let script = interpolation_script(&ra.formula, &rb.formula, g.as_deref());
        if let Some(o) = run(backend_cmd, &script, budget)? {
            out = Some(o);
            break;
        }
    }
    let out = out.ok_or_else(|| InterpError::Undecided(format!("interpolation timeout after {} s", cfg.timeout.as_secs())))?;
    let raw = read_interpolant(&out, &funs)?;
    let i = match back_translate(sig, &raw, &table) {
        Ok(i) => i,
        Err(raw) => return Ok(InterpResult::Untranslatable(raw)),
    };
    if !validate_interpolant(sig, &i, prob, &cfg.decide)? {
        return Err(InterpError::Invalid(i.display(sig).to_string()));
    }
    Ok(InterpResult::Interpolant(i))
}

fn merge_tables(a: &SymbolTable, b: &SymbolTable) -> SymbolTable {
    let mut t = a.clone();
    t.funs.extend(b.funs.iter().map(|(k, v)| (k.clone(), *v)));
    for (k, v) in &b.vars {
        t.vars.entry(k.clone()).or_insert_with(|| v.clone());
    }
    t.enum_sorts.extend(b.enum_sorts.iter().copied());
    t
}

/// Whether `i` is an interpolant of `prob`: its variables are shared,
/// `A & !i` and `B & i` are both unsatisfiable.
pub fn validate_interpolant(
    sig: &Signature,
    i: &Formula,
    prob: &InterpolationProblem,
    cfg: &DecideConfig,
) -> Result<bool, InterpError> {
    if !i.free_vars().is_subset(&prob.shared()) {
        return Ok(false);
    }
    for f in [
        Formula::And(vec![prob.a.clone(), Formula::not(i.clone())]),
        Formula::And(vec![prob.b.clone(), i.clone()]),
    ] {
        match decide(sig, &f, cfg)?.verdict {
            Verdict::Unsat => {}
            Verdict::Sat(_) => return Ok(false),
            Verdict::Unknown(why) => return Err(InterpError::Undecided(why)),
        }
    }
    Ok(true)
}

/// What a reduced integer term denotes.
enum Kind {
    /// A term of an ADT sort.
    Adt(SortId),
    /// An integer quantity.
    Int,
    /// `ctorId_S(t)`.
    CtorId(SortId),
}

struct Back<'a> {
    sig: &'a Signature,
    table: &'a SymbolTable,
    raw: String,
}

type BackResult<T> = Result<T, String>;

impl Back<'_> {
    fn fail<T>(&self, why: &str) -> BackResult<T> {
        Err(format!("{why} in {}", self.raw))
    }

    fn kind(&self, t: &ITerm) -> BackResult<Kind> {
        match t {
            ITerm::Const(_) => Ok(Kind::Int),
            ITerm::Var(v) => match self.table.vars.get(v) {
                Some(info) if info.origin == VarOrigin::Source => Ok(match info.sort {
                    VarSort::Adt(s) => Kind::Adt(s),
                    VarSort::Int => Kind::Int,
                }),
                _ => self.fail(&format!("non-source variable `{v}`")),
            },
            ITerm::App(f, _) => match self.table.fun_origin(f) {
                Some(FunOrigin::Ctor(c)) => Ok(Kind::Adt(self.sig.ctor(c).sort)),
                Some(FunOrigin::Sel(c, j)) => Ok(Kind::Adt(self.sig.ctor(c).args[j].sort)),
                Some(FunOrigin::CtorIdOf(s)) => Ok(Kind::CtorId(s)),
                Some(FunOrigin::Size(_)) => Ok(Kind::Int),
                Some(FunOrigin::Depth(_)) => self.fail("depth function"),
                None => self.fail(&format!("unknown function `{f}`")),
            },
        }
    }

    /// Number of values of a finite-valued term, if it is one.
    fn finite(&self, t: &ITerm) -> BackResult<Option<(SortId, bool)>> {
        Ok(match self.kind(t)? {
            Kind::CtorId(s) => Some((s, true)),
            Kind::Adt(s) if self.table.enum_sorts.contains(&s) => Some((s, false)),
            _ => None,
        })
    }

    /// The ADT term of sort `s` denoted by `t`.
    fn term(&self, t: &ITerm, s: SortId) -> BackResult<Term> {
        match t {
            ITerm::Const(k) if self.table.enum_sorts.contains(&s) => match self.sig.ctor_by_index(s, *k) {
                Some(c) => Ok(Term::Ctor(c, Vec::new())),
                None => self.fail(&format!("no constructor with index {k}")),
            },
            ITerm::Const(k) => self.fail(&format!("integer {k} as a term")),
            ITerm::Var(v) => match self.kind(t)? {
                Kind::Adt(vs) if vs == s => Ok(Term::var(v, s)),
                _ => self.fail(&format!("ill-sorted variable `{v}`")),
            },
            ITerm::App(f, args) => match self.table.fun_origin(f) {
                Some(FunOrigin::Ctor(c)) if self.sig.ctor(c).sort == s => {
                    let sorts: Vec<SortId> = self.sig.ctor(c).args.iter().map(|a| a.sort).collect();
                    let args = args
                        .iter()
                        .zip(sorts)
                        .map(|(a, s)| self.term(a, s))
                        .collect::<BackResult<Vec<_>>>()?;
                    Ok(Term::Ctor(c, args))
                }
                Some(FunOrigin::Sel(c, j)) if self.sig.ctor(c).args[j].sort == s => {
                    let arg = self.term(&args[0], self.sig.ctor(c).sort)?;
                    Ok(Term::Sel(c, j, Box::new(arg)))
                }
                _ => self.fail(&format!("`{f}` as a term of sort {}", self.sig.sort_name(s))),
            },
        }
    }

    /// The integer expression denoted by an integer-valued term.
    fn int(&self, t: &ITerm) -> BackResult<IntExpr> {
        match t {
            ITerm::Const(k) => Ok(IntExpr::Const(*k)),
            ITerm::Var(v) => match self.kind(t)? {
                Kind::Int => Ok(IntExpr::Var(v.clone())),
                _ => self.fail(&format!("arithmetic on ADT variable `{v}`")),
            },
            ITerm::App(f, args) => match self.table.fun_origin(f) {
                Some(FunOrigin::Size(s)) => Ok(IntExpr::Size(self.term(&args[0], s)?)),
                _ => self.fail(&format!("arithmetic on `{f}`")),
            },
        }
    }

    /// `sum + constant op 0` over integer expressions.
    fn int_atom(&self, op: CmpOp, terms: &[(ITerm, i64)], constant: i64) -> BackResult<Formula> {
        if terms.is_empty() {
            return Ok(if op.holds(constant as i128, 0) { Formula::True } else { Formula::False });
        }
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for (t, k) in terms {
            let e = self.int(t)?;
            let side = if *k > 0 { &mut lhs } else { &mut rhs };
            side.push(if k.abs() == 1 { e } else { IntExpr::Mul(k.abs(), Box::new(e)) });
        }
        match constant.signum() {
            1 => lhs.push(IntExpr::Const(constant)),
            -1 => rhs.push(IntExpr::Const(-constant)),
            _ => {}
        }
        let side = |mut xs: Vec<IntExpr>| match xs.len() {
            0 => IntExpr::Const(0),
            1 => xs.pop().expect("one element"),
            _ => IntExpr::Add(xs),
        };
        Ok(Formula::IntCmp(op, side(lhs), side(rhs)))
    }

    fn atom(&self, op: CmpOp, a: &Lin, b: &Lin) -> BackResult<Formula> {
        let (ca, ka) = a.canonical();
        let (cb, kb) = b.canonical();
        let mut coeffs = ca;
        for (t, k) in cb {
            *coeffs.entry(t).or_insert(0) -= k;
        }
        coeffs.retain(|_, k| *k != 0);
        let constant = ka - kb;
        let terms: Vec<(ITerm, i64)> = coeffs.into_iter().collect();
        // equations between two ADT terms
        if op == CmpOp::Eq && constant == 0 && terms.len() == 2 && terms[0].1 == -terms[1].1 && terms[0].1.abs() == 1 {
            if let (Kind::Adt(s), Kind::Adt(r)) = (self.kind(&terms[0].0)?, self.kind(&terms[1].0)?) {
                if s == r {
                    return Ok(Formula::Eq(self.term(&terms[0].0, s)?, self.term(&terms[1].0, s)?));
                }
            }
        }
        let mut finite = Vec::new();
        let mut rest = Vec::new();
        for (t, k) in terms {
            match self.finite(&t)? {
                Some((s, is_id)) => finite.push((t, k, s, is_id)),
                None => rest.push((t, k)),
            }
        }
        if finite.is_empty() {
            return self.int_atom(op, &rest, constant);
        }
        if let ([(_, k, s, _)], [], CmpOp::Eq) = (finite.as_slice(), rest.as_slice(), op) {
            if k.abs() != 1 || self.sig.ctor_by_index(*s, -constant * k).is_none() {
                return self.fail(&format!("no constructor with index {}", -constant * k));
            }
        }
        // case split over the values of the finite-valued terms
        let counts: Vec<usize> = finite.iter().map(|(_, _, s, _)| self.sig.num_ctors(*s)).collect();
        let total = counts.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        if total.is_none_or(|n| n > MAX_CASES) {
            return self.fail("too many value combinations");
        }
        let mut cases = Vec::new();
        let mut idx = vec![0usize; finite.len()];
        'outer: loop {
            let mut conds = Vec::new();
            let mut c = constant;
            for ((t, k, s, is_id), &v) in finite.iter().zip(&idx) {
                c += k * v as i64;
                let ctor = self.sig.ctor_by_index(*s, v as i64).expect("index in range");
                conds.push(if *is_id {
                    let ITerm::App(_, args) = t else { unreachable!("ctorId application") };
                    Formula::Tester(ctor, self.term(&args[0], *s)?)
                } else {
                    Formula::Eq(self.term(t, *s)?, Term::Ctor(ctor, Vec::new()))
                });
            }
            match self.int_atom(op, &rest, c)? {
                Formula::False => {}
                Formula::True => cases.push(conj(conds)),
                residual => {
                    conds.push(residual);
                    cases.push(conj(conds));
                }
            }
            for p in (0..idx.len()).rev() {
                idx[p] += 1;
                if idx[p] < counts[p] {
                    continue 'outer;
                }
                idx[p] = 0;
            }
            break;
        }
        Ok(disj(cases))
    }

    fn formula(&self, f: &RFormula) -> BackResult<Formula> {
        Ok(match f {
            RFormula::True => Formula::True,
            RFormula::False => Formula::False,
            RFormula::Cmp(op, a, b) => self.atom(*op, a, b)?,
            RFormula::Not(x) => Formula::not(self.formula(x)?),
            RFormula::And(xs) => conj(xs.iter().map(|x| self.formula(x)).collect::<BackResult<_>>()?),
            RFormula::Or(xs) => disj(xs.iter().map(|x| self.formula(x)).collect::<BackResult<_>>()?),
        })
    }
}

fn conj(mut xs: Vec<Formula>) -> Formula {
    match xs.len() {
        0 => Formula::True,
        1 => xs.pop().expect("one element"),
        _ => Formula::And(xs),
    }
}

fn disj(mut xs: Vec<Formula>) -> Formula {
    match xs.len() {
        0 => Formula::False,
        1 => xs.pop().expect("one element"),
        _ => Formula::Or(xs),
    }
}

/// Translates a reduced formula over source variables back to ADT
/// vocabulary. On failure the error carries the reason and the raw
/// reduced formula.
pub fn back_translate(sig: &Signature, i: &RFormula, table: &SymbolTable) -> Result<Formula, String> {
    let b = Back {
        sig,
        table,
        raw: term_to_string(i),
    };
    b.formula(i)
}
