//! Turning integer models of reducts into ADT models, and checking ADT
//! models against formulas.
//!
//! Every ADT variable `x : S` is interpreted by the term `gamma(x~, S)`,
//! where `gamma` maps (integer value, sort) pairs injectively to
//! constructor terms. Pairs constrained by active constructor, selector
//! or tester literals are built bottom-up from the `ctorId_S` and selector
//! graphs of the integer model; all other pairs receive fresh terms of
//! minimal size.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{AdtModel, EvalError, Evaluator, Formula, Term, VarSort};
use crate::backend::IntModel;
use crate::normalize::{to_nnf, Flat, FlatFormula, FlatLit};
use crate::reduce::{ctor_id_fn, ReducedFormula};
use crate::reduced::RFormula;
use crate::signature::{CtorId, Signature, SortId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("internal error during model reconstruction: {0}")]
    InternalError(String),
    #[error("term enumeration limit reached: {0}")]
    ResourceLimit(String),
}

/// A value of a reduced ADT variable together with its sort.
pub type Pair = (i64, SortId);

/// Bookkeeping of one reconstruction run.
#[derive(Debug, Clone, Default)]
pub struct ReconstructionState {
    /// Pairs of variables in active constructor, selector and tester literals.
    pub d: BTreeSet<Pair>,
    /// Children of `d` pairs and values of all other variables.
    pub d_t: BTreeSet<Pair>,
    /// Head constructor and children of every `d` pair.
    pub dep: BTreeMap<Pair, (CtorId, Vec<Pair>)>,
    pub gamma: BTreeMap<Pair, Term>,
    /// Pairs that received fresh terms, in assignment order.
    pub fresh: Vec<Pair>,
}

impl ReconstructionState {
    fn range_contains(&self, t: &Term) -> bool {
        self.gamma.values().any(|u| u == t)
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub model: AdtModel,
    pub state: ReconstructionState,
    /// Value pair of every ADT variable of the flat formula.
    pub var_pairs: BTreeMap<String, Pair>,
}

impl Reconstruction {
    /// ADT variables whose term was drawn fresh rather than built from
    /// the integer model.
    pub fn fresh_vars(&self) -> Vec<&str> {
        let fresh: BTreeSet<&Pair> = self.state.fresh.iter().collect();
        self.var_pairs
            .iter()
            .filter(|(_, p)| fresh.contains(p))
            .map(|(v, _)| v.as_str())
            .collect()
    }
}

/// ADT model of the source variables of `flat` from a model of the
/// unsimplified reduct `reduct` of `flat`.
pub fn reconstruct(
    sig: &Signature,
    flat: &FlatFormula,
    reduct: &ReducedFormula,
    m: &IntModel,
) -> Result<AdtModel, ReconstructError> {
    reconstruct_traced(sig, flat, reduct, m).map(|r| r.model)
}

pub fn reconstruct_traced(
    sig: &Signature,
    flat: &FlatFormula,
    reduct: &ReducedFormula,
    m: &IntModel,
) -> Result<Reconstruction, ReconstructError> {
    let mut idx = 0;
    let tree = annotate(&flat.root, &reduct.literals, &mut idx);
    if idx != reduct.literals.len() {
        return Err(ReconstructError::InternalError(format!(
            "reduct has {} literal reductions, flat formula {}",
            reduct.literals.len(),
            idx
        )));
    }
    if !m.eval(&tree.formula) {
        return Err(ReconstructError::InternalError(
            "integer model falsifies the reduct".into(),
        ));
    }
    let mut active = Vec::new();
    tree.active(m, &mut active)?;

    let pair = |v: &str| -> Result<Pair, ReconstructError> {
        match flat.vars.get(v) {
            Some(VarSort::Adt(s)) => Ok((m.var(v), *s)),
            _ => Err(ReconstructError::InternalError(format!("`{v}` is not an ADT variable"))),
        }
    };
    let enum_sorts = &reduct.table.enum_sorts;
    let mut st = ReconstructionState::default();
    for lit in &active {
        let v = match lit {
            FlatLit::Ctor { result, .. } => result,
            FlatLit::Sel { arg, .. } => arg,
            FlatLit::Tester { var, .. } => var,
            _ => continue,
        };
        st.d.insert(pair(v)?);
    }
    for p in st.d.clone() {
        let (a, s) = p;
        if enum_sorts.contains(&s) {
            continue;
        }
        let Some(c) = sig.ctor_by_index(s, m.apply(&ctor_id_fn(sig, s), &[a])) else {
            st.d.remove(&p);
            continue;
        };
        let children: Vec<Pair> = sig
            .ctor(c)
            .args
            .iter()
            .enumerate()
            .map(|(j, arg)| (m.apply(sig.selector_name(c, j), &[a]), arg.sort))
            .collect();
        st.d_t.extend(children.iter().copied());
        st.dep.insert(p, (c, children));
    }
    let mut var_pairs = BTreeMap::new();
    for (v, s) in flat.adt_vars() {
        let p = (m.var(v), s);
        var_pairs.insert(v.clone(), p);
        st.d_t.insert(p);
    }
    let d_t: BTreeSet<Pair> = st.d_t.difference(&st.d).copied().collect();
    st.d_t = d_t;

    // enumeration sorts are represented by constructor indices
    for &p in st.d.iter().chain(st.d_t.iter()) {
        if enum_sorts.contains(&p.1) {
            let c = sig.ctor_by_index(p.1, p.0).ok_or_else(|| {
                ReconstructError::InternalError(format!(
                    "value {} out of range for sort {}",
                    p.0,
                    sig.sort_name(p.1)
                ))
            })?;
            st.gamma.insert(p, Term::Ctor(c, Vec::new()));
        }
    }

    let mut supply = Supply::new(sig);
    loop {
        // a constrained pair whose children all have terms
        let mut progress = true;
        while progress {
            progress = false;
            let ready: Vec<Pair> = st
                .dep
                .iter()
                .filter(|(p, (_, ch))| {
                    !st.gamma.contains_key(p) && ch.iter().all(|c| st.gamma.contains_key(c))
                })
                .map(|(p, _)| *p)
                .collect();
            for p in ready {
                let (c, ch) = &st.dep[&p];
                let t = Term::Ctor(*c, ch.iter().map(|x| st.gamma[x].clone()).collect());
                if st.range_contains(&t) {
                    return Err(ReconstructError::InternalError(format!(
                        "injectivity violated at value {} of sort {}",
                        p.0,
                        sig.sort_name(p.1)
                    )));
                }
                st.gamma.insert(p, t);
                progress = true;
            }
        }
        // a fresh term of minimal size for an unconstrained pair
        let pending: Vec<Pair> = st
            .d_t
            .iter()
            .filter(|p| !st.gamma.contains_key(p))
            .copied()
            .collect();
        if pending.is_empty() {
            break;
        }
        let mut best: Option<(u64, Pair)> = None;
        for p in pending {
            let size = supply.peek(p.1, &st)?.size();
            if best.is_none_or(|(b, _)| size < b) {
                best = Some((size, p));
            }
        }
        let (_, p) = best.expect("pending is non-empty");
        let t = supply.peek(p.1, &st)?.clone();
        debug_assert!(!st.range_contains(&t));
        st.gamma.insert(p, t);
        st.fresh.push(p);
    }
    if let Some(p) = st.d.iter().find(|p| !st.gamma.contains_key(p)) {
        return Err(ReconstructError::InternalError(format!(
            "cyclic constructor dependency at value {} of sort {}",
            p.0,
            sig.sort_name(p.1)
        )));
    }

    let mut model = AdtModel::new();
    for (v, s) in &flat.vars {
        if !flat.source_vars.contains(v) {
            continue;
        }
        match s {
            VarSort::Adt(_) => {
                model.adt.insert(v.clone(), st.gamma[&var_pairs[v]].clone());
            }
            VarSort::Int => {
                model.ints.insert(v.clone(), m.var(v));
            }
        }
    }
    for lit in &active {
        if let FlatLit::Sel {
            ctor,
            index,
            arg,
            result,
        } = lit
        {
            let x = &st.gamma[&var_pairs[arg]];
            if x.head() != Some(*ctor) {
                let y = st.gamma[&var_pairs[result]].clone();
                model.selector_overrides.insert((*ctor, *index, x.clone()), y);
            }
        }
    }
    Ok(Reconstruction {
        model,
        state: st,
        var_pairs,
    })
}

/// The flat formula with the reduction of every node.
struct Annotated<'a> {
    formula: RFormula,
    node: Node<'a>,
}

enum Node<'a> {
    Lit(&'a FlatLit),
    And(Vec<Annotated<'a>>),
    Or(Vec<Annotated<'a>>),
    Const,
}

fn annotate<'a>(f: &'a Flat, lits: &[RFormula], idx: &mut usize) -> Annotated<'a> {
    match f {
        Flat::True => Annotated {
            formula: RFormula::True,
            node: Node::Const,
        },
        Flat::False => Annotated {
            formula: RFormula::False,
            node: Node::Const,
        },
        Flat::Lit(l) => {
            let formula = lits.get(*idx).cloned().unwrap_or(RFormula::False);
            *idx += 1;
            Annotated {
                formula,
                node: Node::Lit(l),
            }
        }
        Flat::And(xs) | Flat::Or(xs) => {
            let children: Vec<Annotated> = xs.iter().map(|x| annotate(x, lits, idx)).collect();
            let parts = children.iter().map(|c| c.formula.clone()).collect();
            if matches!(f, Flat::And(_)) {
                Annotated {
                    formula: RFormula::And(parts),
                    node: Node::And(children),
                }
            } else {
                Annotated {
                    formula: RFormula::Or(parts),
                    node: Node::Or(children),
                }
            }
        }
    }
}

impl<'a> Annotated<'a> {
    /// Literals on the path that makes this node true: all conjuncts, and
    /// the first true disjunct.
    fn active(&self, m: &IntModel, out: &mut Vec<&'a FlatLit>) -> Result<(), ReconstructError> {
        match &self.node {
            Node::Const => {}
            Node::Lit(l) => out.push(l),
            Node::And(xs) => {
                for x in xs {
                    x.active(m, out)?;
                }
            }
            Node::Or(xs) => {
                let x = xs.iter().find(|x| m.eval(&x.formula)).ok_or_else(|| {
                    ReconstructError::InternalError("no disjunct holds in the model".into())
                })?;
                x.active(m, out)?;
            }
        }
        Ok(())
    }
}

/// Terms of each sort in enumeration order, extended on demand.
struct Supply<'a> {
    sig: &'a Signature,
    max: usize,
    table: Vec<Vec<Term>>,
    cursor: Vec<usize>,
}

/// Size bound beyond which no fresh terms are searched.
const SUPPLY_MAX_SIZE: usize = 64;

impl<'a> Supply<'a> {
    fn new(sig: &'a Signature) -> Self {
        Supply {
            sig,
            max: 0,
            table: vec![Vec::new(); sig.num_sorts()],
            cursor: vec![0; sig.num_sorts()],
        }
    }

    fn grow(&mut self) -> Result<(), ReconstructError> {
        if self.max >= SUPPLY_MAX_SIZE {
            return Err(ReconstructError::ResourceLimit(format!(
                "no unused term of size <= {SUPPLY_MAX_SIZE}"
            )));
        }
        self.max = (self.max + 4).min(SUPPLY_MAX_SIZE);
        let t = self
            .sig
            .terms_by_size(self.max)
            .map_err(|e| ReconstructError::ResourceLimit(e.to_string()))?;
        self.table = t
            .into_iter()
            .map(|by_size| by_size.into_iter().flatten().collect())
            .collect();
        Ok(())
    }

    /// The first term of sort `s` outside the range of `gamma`.
    fn peek(&mut self, s: SortId, st: &ReconstructionState) -> Result<&Term, ReconstructError> {
        let used: BTreeSet<&Term> = st.gamma.values().collect();
        loop {
            let list = &self.table[s.0];
            while self.cursor[s.0] < list.len() && used.contains(&list[self.cursor[s.0]]) {
                self.cursor[s.0] += 1;
            }
            if self.cursor[s.0] < list.len() {
                break;
            }
            if let Some(top) = self.sig.size_image(s).max() {
                if top as usize <= self.max {
                    return Err(ReconstructError::InternalError(format!(
                        "more values than terms of sort {}",
                        self.sig.sort_name(s)
                    )));
                }
            }
            self.grow()?;
        }
        Ok(&self.table[s.0][self.cursor[s.0]])
    }
}

/// Outcome of [`check_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelCheck {
    pub holds: bool,
    /// The first falsified literal of the negation normal form.
    pub diagnostic: Option<String>,
}

/// Evaluates `f` under `model`; on failure names the first literal that
/// is false on a falsifying path.
pub fn check_model(sig: &Signature, model: &AdtModel, f: &Formula) -> Result<ModelCheck, EvalError> {
    let ev = Evaluator::new(sig, model);
    if ev.formula(f)? {
        return Ok(ModelCheck {
            holds: true,
            diagnostic: None,
        });
    }
    let lit = falsified(&ev, &to_nnf(f))?;
    Ok(ModelCheck {
        holds: false,
        diagnostic: lit.map(|l| l.display(sig).to_string()),
    })
}

fn falsified(ev: &Evaluator, f: &Formula) -> Result<Option<Formula>, EvalError> {
    match f {
        Formula::And(xs) => {
            for x in xs {
                if !ev.formula(x)? {
                    return falsified(ev, x);
                }
            }
            Ok(None)
        }
        Formula::Or(xs) => match xs.first() {
            Some(x) => falsified(ev, x),
            None => Ok(Some(Formula::False)),
        },
        other => Ok((!ev.formula(other)?).then(|| other.clone())),
    }
}

#[cfg(test)]
mod tests;
