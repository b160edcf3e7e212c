//! Built-in EUF+LIA solver.
//!
//! Case splitting follows the Boolean structure of the formula directly.
//! Literals carry the decision level that introduced them; a failed branch
//! reports the levels its conflict depends on, so splits that played no
//! part are skipped on backtracking. Each branch is checked by a theory
//! procedure that merges equal terms by congruence closure, gives every
//! class one integer variable, solves the linear part, and repairs the
//! candidate lazily: violated disequalities are split into `<` and `>`,
//! and two applications with equal argument values but different results
//! are split into "arguments equal" or "some argument differs".

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::lia::{self, Constraint, LiaResult};
use super::{IntModel, SolverResult};
use crate::reduced::{AtomKey, ITerm, RFormula};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Theory checks per query.
    pub max_checks: usize,
    /// Branch-and-bound nodes per linear check.
    pub max_bb_nodes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_checks: 200_000,
            max_bb_nodes: 2_000,
        }
    }
}

/// Linear literal over terms: `sum + constant` compared with 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Lit {
    Le(Vec<(ITerm, i64)>, i64),
    Eq(Vec<(ITerm, i64)>, i64),
    Ne(Vec<(ITerm, i64)>, i64),
}

#[derive(Debug, Clone)]
enum Node {
    True,
    False,
    Lit(Lit),
    And(Vec<Node>),
    Or(Vec<Node>),
}

fn nnf(f: &RFormula, pos: bool) -> Node {
    match f {
        RFormula::True => if pos { Node::True } else { Node::False },
        RFormula::False => if pos { Node::False } else { Node::True },
        RFormula::Not(x) => nnf(x, !pos),
        RFormula::And(xs) | RFormula::Or(xs) => {
            let conj = matches!(f, RFormula::And(_)) == pos;
            let kids = xs.iter().map(|x| nnf(x, pos)).collect();
            if conj { Node::And(kids) } else { Node::Or(kids) }
        }
        RFormula::Cmp(op, a, b) => {
            let k = AtomKey::new(*op, a, b);
            if let Some(v) = k.constant_value() {
                return if v == pos { Node::True } else { Node::False };
            }
            Node::Lit(match (k.is_eq, pos) {
                (true, true) => Lit::Eq(k.coeffs, k.constant),
                (true, false) => Lit::Ne(k.coeffs, k.constant),
                (false, true) => Lit::Le(k.coeffs, k.constant),
                (false, false) => Lit::Le(
                    k.coeffs.into_iter().map(|(t, c)| (t, -c)).collect(),
                    1 - k.constant,
                ),
            })
        }
    }
}

/// Decides `f`. Returns `Unknown` when a limit or the deadline is hit.
pub fn solve_builtin(f: &RFormula, limits: &Limits, timeout: Option<Duration>) -> SolverResult {
    let root = nnf(f, true);
    let mut s = Search {
        limits: limits.clone(),
        deadline: timeout.map(|t| Instant::now() + t),
        checks: 0,
        probe: None,
        exhausted: None,
        formula: f,
    };
    match s.dfs(BTreeMap::new(), vec![(&root, 0)], Vec::new(), 0) {
        Outcome::Sat(m) => SolverResult::Sat(m),
        Outcome::Conflict(_) => SolverResult::Unsat,
        Outcome::Unknown => SolverResult::Unknown(
            s.exhausted.unwrap_or_else(|| "resource limit".into()),
        ),
    }
}

/// Decision levels a conflict depends on.
type Levels = BTreeSet<usize>;

enum Outcome {
    Sat(IntModel),
    Conflict(Levels),
    Unknown,
}

struct Search<'a> {
    limits: Limits,
    deadline: Option<Instant>,
    checks: usize,
    /// Check count at which the current core probe gives up.
    probe: Option<usize>,
    exhausted: Option<String>,
    formula: &'a RFormula,
}

fn node_holds(m: &IntModel, n: &Node) -> bool {
    match n {
        Node::True => true,
        Node::False => false,
        Node::Lit(l) => lit_holds(m, l),
        Node::And(xs) => xs.iter().all(|x| node_holds(m, x)),
        Node::Or(xs) => xs.iter().any(|x| node_holds(m, x)),
    }
}

/// Number of literals of `n` that hold under `m`, counting only the
/// first disjunct of nested disjunctions.
fn agreement(m: &IntModel, n: &Node) -> usize {
    match n {
        Node::True => 1,
        Node::False => 0,
        Node::Lit(l) => usize::from(lit_holds(m, l)),
        Node::And(xs) => xs.iter().map(|x| agreement(m, x)).sum(),
        Node::Or(xs) => xs.iter().map(|x| agreement(m, x)).max().unwrap_or(0),
    }
}

fn lit_holds(m: &IntModel, l: &Lit) -> bool {
    let val = |ts: &[(ITerm, i64)], c: i64| -> i128 {
        ts.iter().map(|(t, k)| *k as i128 * m.term(t) as i128).sum::<i128>() + c as i128
    };
    match l {
        Lit::Le(ts, c) => val(ts, *c) <= 0,
        Lit::Eq(ts, c) => val(ts, *c) == 0,
        Lit::Ne(ts, c) => val(ts, *c) != 0,
    }
}

impl<'a> Search<'a> {
    fn out_of_budget(&mut self) -> bool {
        if self.probe.is_some_and(|p| self.checks >= p) {
            self.exhausted = Some("probe budget".into());
            return true;
        }
        if self.checks >= self.limits.max_checks {
            self.exhausted = Some(format!("theory check limit {} reached", self.limits.max_checks));
            return true;
        }
        if self.deadline.is_some_and(|d| Instant::now() > d) {
            self.exhausted = Some("timeout".into());
            return true;
        }
        false
    }

    /// Asserts `lits`, every node of `agenda` and the disjunctions in
    /// `pending`; nodes are paired with the level that introduced them.
    fn dfs(
        &mut self,
        mut lits: BTreeMap<Lit, usize>,
        agenda: Vec<(&'a Node, usize)>,
        mut pending: Vec<(&'a Node, usize)>,
        depth: usize,
    ) -> Outcome {
        let mut stack = agenda;
        while let Some((n, lvl)) = stack.pop() {
            match n {
                Node::True => {}
                Node::False => return Outcome::Conflict(Levels::from([lvl])),
                Node::Lit(l) => {
                    let e = lits.entry(l.clone()).or_insert(lvl);
                    *e = (*e).min(lvl);
                }
                Node::And(xs) => stack.extend(xs.iter().rev().map(|x| (x, lvl))),
                Node::Or(xs) => {
                    if !xs.iter().any(|x| matches!(x, Node::True)) {
                        pending.push((n, lvl));
                    }
                }
            }
        }
        let model = match self.theory(&lits, depth) {
            Outcome::Sat(m) => m,
            other => return other,
        };
        if model.eval(self.formula) {
            return Outcome::Sat(model);
        }
        let Some(pos) = pending.iter().position(|(n, _)| !node_holds(&model, n)) else {
            // every pending disjunction holds already
            return Outcome::Sat(model);
        };
        let (or, origin) = pending.remove(pos);
        let Node::Or(split) = or else { unreachable!("disjunctions only") };
        let level = depth + 1;
        let mut unknown = false;
        let mut reasons = Levels::from([origin]);
        // disjuncts agreeing most with the current model first
        let mut order: Vec<&Node> = split.iter().collect();
        order.sort_by_key(|d| std::cmp::Reverse(agreement(&model, d)));
        for d in order {
            match self.dfs(lits.clone(), vec![(d, level)], pending.clone(), level) {
                Outcome::Sat(m) => return Outcome::Sat(m),
                Outcome::Unknown => unknown = true,
                Outcome::Conflict(mut ls) => {
                    if !ls.remove(&level) {
                        // the choice made here played no part
                        return Outcome::Conflict(ls);
                    }
                    reasons.extend(ls);
                }
            }
        }
        if unknown {
            Outcome::Unknown
        } else {
            Outcome::Conflict(reasons)
        }
    }

    /// Theory check of `lits`; conflicts are reduced to a set of levels
    /// whose literals are inconsistent on their own. The literals below
    /// `depth` are known to be consistent.
    fn theory(&mut self, lits: &BTreeMap<Lit, usize>, depth: usize) -> Outcome {
        let all: Vec<Lit> = lits.keys().cloned().collect();
        let before = self.checks;
        match self.check(all) {
            Checked::Sat(m) => Outcome::Sat(m),
            Checked::Unknown => Outcome::Unknown,
            Checked::Unsat => {
                let cost = self.checks - before;
                let mut keep: Levels = lits.values().copied().collect();
                let candidates: Vec<usize> = keep
                    .iter()
                    .rev()
                    .copied()
                    .filter(|&l| l > 0 && l != depth)
                    .collect();
                for l in candidates {
                    keep.remove(&l);
                    let subset: Vec<Lit> = lits
                        .iter()
                        .filter(|(_, lv)| keep.contains(lv))
                        .map(|(x, _)| x.clone())
                        .collect();
                    // probes costlier than the full check keep their level
                    self.probe = Some(self.checks + 2 * cost + 4);
                    let refuted = matches!(self.check(subset), Checked::Unsat);
                    self.probe = None;
                    if self.exhausted.is_some() && !self.out_of_budget() {
                        self.exhausted = None;
                    }
                    if !refuted {
                        keep.insert(l);
                    }
                }
                Outcome::Conflict(keep)
            }
        }
    }

    fn check(&mut self, lits: Vec<Lit>) -> Checked {
        if self.out_of_budget() {
            return Checked::Unknown;
        }
        self.checks += 1;
        
        let mut cc = Closure::default();
        for l in &lits {
            cc.add_lit(l);
        }
        if !cc.close() {
            return Checked::Unsat;
        }
        let mut cons = Vec::new();
        let mut diseqs = Vec::new();
        for l in &lits {
            match l {
                Lit::Le(ts, c) => cons.push(cc.constraint(ts, *c, false)),
                Lit::Eq(ts, c) => {
                    if !cc.is_merge(ts, *c) {
                        cons.push(cc.constraint(ts, *c, true));
                    }
                }
                Lit::Ne(ts, c) => {
                    let d = cc.constraint(ts, *c, true);
                    if d.coeffs.is_empty() {
                        if d.constant.is_zero() {
                            return Checked::Unsat;
                        }
                        continue;
                    }
                    diseqs.push((l, d));
                }
            }
        }
        for (root, v) in cc.class_constants() {
            cons.push(Constraint::new([(cc.var_of_root(root), 1)], -v, true));
        }
        let vals = match lia::solve(cc.num_vars(), &cons, self.limits.max_bb_nodes) {
            LiaResult::Sat(v) => v,
            LiaResult::Unsat => return Checked::Unsat,
            LiaResult::Unknown(r) => {
                self.exhausted = Some(r);
                return Checked::Unknown;
            }
        };
        let mut branches: Vec<Vec<Lit>> = Vec::new();
        if let Some((Lit::Ne(ts, c), _)) = diseqs.iter().find(|(_, d)| d.value(&vals).is_zero()) {
            // ts + c + 1 <= 0 or -(ts + c) + 1 <= 0
            let neg: Vec<(ITerm, i64)> = ts.iter().map(|(t, k)| (t.clone(), -k)).collect();
            for extra in [Lit::Le(ts.clone(), c + 1), Lit::Le(neg, 1 - c)] {
                let mut next = lits.clone();
                next.push(extra);
                branches.push(next);
            }
        } else if let Some(pairs) = cc.congruence_conflict(&vals) {
            let eqs: Vec<Lit> = pairs
                .iter()
                .map(|(a, b)| Lit::Eq(vec![(a.clone(), 1), (b.clone(), -1)], 0))
                .collect();
            let mut next = lits.clone();
            next.extend(eqs);
            branches.push(next);
            for (a, b) in &pairs {
                let mut next = lits.clone();
                next.push(Lit::Ne(vec![(a.clone(), 1), (b.clone(), -1)], 0));
                branches.push(next);
            }
        } else {
            return match cc.model(&vals) {
                Some(m) => Checked::Sat(m),
                None => {
                    self.exhausted = Some("model value exceeds 64 bits".into());
                    Checked::Unknown
                }
            };
        }
        let mut unknown = false;
        for b in branches {
            match self.check(b) {
                Checked::Sat(m) => return Checked::Sat(m),
                Checked::Unknown => unknown = true,
                Checked::Unsat => {}
            }
        }
        if unknown {
            Checked::Unknown
        } else {
            Checked::Unsat
        }
    }
}

enum Checked {
    Sat(IntModel),
    Unsat,
    Unknown,
}

#[derive(Debug, Clone)]
enum TermNode {
    Var(String),
    Const(i64),
    App(String, Vec<usize>),
}

/// Congruence closure over the terms of a literal set, with at most one
/// integer constant per class.
#[derive(Default)]
struct Closure {
    index: BTreeMap<ITerm, usize>,
    terms: Vec<ITerm>,
    nodes: Vec<TermNode>,
    parent: Vec<usize>,
    constant: Vec<Option<i64>>,
    merges: Vec<(usize, usize)>,
    vars: BTreeMap<usize, usize>,
    conflict: bool,
}

impl Closure {
    fn intern(&mut self, t: &ITerm) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        let node = match t {
            ITerm::Var(v) => TermNode::Var(v.clone()),
            ITerm::Const(c) => TermNode::Const(*c),
            ITerm::App(f, args) => TermNode::App(f.clone(), args.iter().map(|a| self.intern(a)).collect()),
        };
        let i = self.nodes.len();
        self.constant.push(match node {
            TermNode::Const(c) => Some(c),
            _ => None,
        });
        self.nodes.push(node);
        self.terms.push(t.clone());
        self.parent.push(i);
        self.index.insert(t.clone(), i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        match (self.constant[lo], self.constant[hi]) {
            (Some(x), Some(y)) if x != y => self.conflict = true,
            (None, c) => self.constant[lo] = c,
            _ => {}
        }
        self.parent[hi] = lo;
        true
    }

    /// `ts + c = 0` as a plain term equality or a constant definition.
    fn as_merge(ts: &[(ITerm, i64)], c: i64) -> Option<(&ITerm, Result<&ITerm, i64>)> {
        match ts {
            [(a, 1), (b, -1)] | [(a, -1), (b, 1)] if c == 0 => Some((a, Ok(b))),
            [(a, 1)] => Some((a, Err(-c))),
            [(a, -1)] => Some((a, Err(c))),
            _ => None,
        }
    }

    fn is_merge(&self, ts: &[(ITerm, i64)], c: i64) -> bool {
        Self::as_merge(ts, c).is_some()
    }

    fn add_lit(&mut self, l: &Lit) {
        let (Lit::Le(ts, _) | Lit::Eq(ts, _) | Lit::Ne(ts, _)) = l;
        for (t, _) in ts {
            self.intern(t);
        }
        if let Lit::Eq(ts, c) = l {
            match Self::as_merge(ts, *c) {
                Some((a, Ok(b))) => {
                    let (a, b) = (self.index[a], self.index[b]);
                    self.merges.push((a, b));
                }
                Some((a, Err(v))) => {
                    let a = self.index[a];
                    let k = self.intern(&ITerm::Const(v));
                    self.merges.push((a, k));
                }
                None => {}
            }
        }
    }

    /// Applies the recorded equalities and closes under congruence.
    /// Returns false on a clash of constants.
    fn close(&mut self) -> bool {
        for (a, b) in std::mem::take(&mut self.merges) {
            self.union(a, b);
        }
        loop {
            let mut changed = false;
            let mut table: HashMap<(String, Vec<usize>), usize> = HashMap::new();
            for i in 0..self.nodes.len() {
                let TermNode::App(f, args) = self.nodes[i].clone() else { continue };
                let key = (f, args.iter().map(|&a| self.find(a)).collect());
                match table.get(&key) {
                    Some(&j) => changed |= self.union(i, j),
                    None => {
                        table.insert(key, i);
                    }
                }
            }
            if !changed || self.conflict {
                break;
            }
        }
        !self.conflict
    }

    fn var_of_root(&mut self, root: usize) -> usize {
        let n = self.vars.len();
        *self.vars.entry(root).or_insert(n)
    }

    fn var_of(&mut self, t: &ITerm) -> usize {
        let i = self.intern(t);
        let r = self.find(i);
        self.var_of_root(r)
    }

    fn num_vars(&self) -> usize {
        self.vars.len()
    }

    fn class_constants(&mut self) -> Vec<(usize, i64)> {
        let roots: BTreeSet<usize> = (0..self.nodes.len()).map(|i| self.find(i)).collect();
        roots
            .into_iter()
            .filter_map(|r| self.constant[r].map(|v| (r, v)))
            .collect()
    }

    fn constraint(&mut self, ts: &[(ITerm, i64)], c: i64, is_eq: bool) -> Constraint {
        let coeffs: Vec<(usize, i64)> = ts.iter().map(|(t, k)| (self.var_of(t), *k)).collect();
        Constraint::new(coeffs, c, is_eq)
    }

    fn value(&mut self, i: usize, vals: &[BigInt]) -> BigInt {
        let r = self.find(i);
        if let Some(v) = self.constant[r] {
            return BigInt::from(v);
        }
        let v = self.var_of_root(r);
        vals.get(v).cloned().unwrap_or_default()
    }

    /// Two applications of one function whose arguments agree in value
    /// but not in class, with different results: the argument pairs that
    /// differ in class.
    fn congruence_conflict(&mut self, vals: &[BigInt]) -> Option<Vec<(ITerm, ITerm)>> {
        let mut seen: BTreeMap<(String, Vec<BigInt>), usize> = BTreeMap::new();
        for i in 0..self.nodes.len() {
            let TermNode::App(f, args) = self.nodes[i].clone() else { continue };
            let key = (f, args.iter().map(|&a| self.value(a, vals)).collect());
            match seen.get(&key) {
                Some(&j) => {
                    if self.value(i, vals) != self.value(j, vals) {
                        let TermNode::App(_, other) = self.nodes[j].clone() else { unreachable!() };
                        let mut pairs = Vec::new();
                        for (&a, &b) in args.iter().zip(&other) {
                            if self.find(a) != self.find(b) {
                                pairs.push((self.terms[a].clone(), self.terms[b].clone()));
                            }
                        }
                        if !pairs.is_empty() {
                            return Some(pairs);
                        }
                    }
                }
                None => {
                    seen.insert(key, i);
                }
            }
        }
        None
    }

    fn model(&mut self, vals: &[BigInt]) -> Option<IntModel> {
        let mut m = IntModel::default();
        for i in 0..self.nodes.len() {
            match self.nodes[i].clone() {
                TermNode::Var(v) => {
                    let x = self.value(i, vals).to_i64()?;
                    m.vars.insert(v, x);
                }
                TermNode::App(f, args) => {
                    let args: Option<Vec<i64>> =
                        args.iter().map(|&a| self.value(a, vals).to_i64()).collect();
                    let x = self.value(i, vals).to_i64()?;
                    m.funs.entry(f).or_default().insert(args?, x);
                }
                TermNode::Const(_) => {}
            }
        }
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::CmpOp;
    use crate::reduced::Lin;

    fn app(f: &str, x: &str) -> ITerm {
        ITerm::app(f, vec![ITerm::var(x)])
    }

    fn run(f: &RFormula) -> SolverResult {
        let r = solve_builtin(f, &Limits::default(), None);
        if let SolverResult::Sat(m) = &r {
            assert!(m.eval(f), "model does not satisfy {f}:\n{m}");
        }
        r
    }

    #[test]
    fn congruence() {
        // f(a) = b, a = c, f(c) != b
        let f = RFormula::And(vec![
            RFormula::eq(app("f", "a"), ITerm::var("b")),
            RFormula::eq(ITerm::var("a"), ITerm::var("c")),
            RFormula::not(RFormula::eq(app("f", "c"), ITerm::var("b"))),
        ]);
        assert_eq!(run(&f), SolverResult::Unsat);
    }

    #[test]
    fn equality_and_its_negation() {
        let e = RFormula::eq(ITerm::var("x"), ITerm::var("y"));
        assert_eq!(run(&RFormula::And(vec![e.clone(), RFormula::not(e)])), SolverResult::Unsat);
    }

    #[test]
    fn disjunctions_and_distinctness() {
        // three pairwise distinct values in [0, 3) plus f injective on them
        let vars = ["a", "b", "c"];
        let mut cs = Vec::new();
        for (i, x) in vars.iter().enumerate() {
            cs.push(RFormula::cmp(CmpOp::Le, Lin::constant(0), Lin::var(x)));
            cs.push(RFormula::cmp(CmpOp::Lt, Lin::var(x), Lin::constant(3)));
            for y in &vars[i + 1..] {
                cs.push(RFormula::not(RFormula::eq(app("f", x), app("f", y))));
            }
        }
        let f = RFormula::And(cs.clone());
        assert!(matches!(run(&f), SolverResult::Sat(_)));
        cs.push(RFormula::cmp(CmpOp::Lt, Lin::var("c"), Lin::constant(2)));
        cs.push(RFormula::cmp(CmpOp::Lt, Lin::var("b"), Lin::constant(2)));
        cs.push(RFormula::cmp(CmpOp::Lt, Lin::var("a"), Lin::constant(2)));
        assert_eq!(run(&RFormula::And(cs)), SolverResult::Unsat);
    }

    #[test]
    fn acyclicity_through_depth() {
        // cons(h, x) = x with depth(x) > depth(tail x) is impossible
        let f = RFormula::And(vec![
            RFormula::eq(ITerm::app("cons", vec![ITerm::var("h"), ITerm::var("x")]), ITerm::var("x")),
            RFormula::eq(app("tail", "x"), ITerm::var("x")),
            RFormula::cmp(CmpOp::Gt, Lin::term(app("depth", "x")), Lin::term(app("depth", "t"))),
            RFormula::eq(ITerm::var("t"), app("tail", "x")),
        ]);
        assert_eq!(run(&f), SolverResult::Unsat);
    }

    #[test]
    fn nested_applications_are_purified_apart() {
        // tail(x) = t and size(x) = size(t) + 2 holds with x != t
        let f = RFormula::And(vec![
            RFormula::eq(app("tail", "x"), ITerm::var("t")),
            RFormula::cmp(CmpOp::Eq, Lin::term(app("size", "x")), Lin::sum(vec![(1, app("size", "t"))], 2)),
        ]);
        assert!(matches!(run(&f), SolverResult::Sat(_)));
    }

    #[test]
    fn boolean_structure() {
        let x = |c| RFormula::eq(ITerm::var("x"), ITerm::Const(c));
        let f = RFormula::And(vec![
            RFormula::Or(vec![x(1), x(2)]),
            RFormula::Or(vec![RFormula::not(x(1)), RFormula::eq(app("g", "x"), ITerm::Const(7))]),
            RFormula::not(RFormula::eq(app("g", "x"), ITerm::Const(7))),
        ]);
        let SolverResult::Sat(m) = run(&f) else { panic!() };
        assert_eq!(m.var("x"), 2);
    }
}
