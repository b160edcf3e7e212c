//! Deciding formulas with size constraints by incremental unfolding.
//!
//! Each round reduces the current formula in size mode and solves it.
//! An unsatisfiable reduct refutes the input. A model in which every ADT
//! variable shares its value with an unfolded variable of the same sort
//! yields a genuine ADT model. Otherwise one more variable `x : S` is
//! unfolded by conjoining `f_1(x_1, ...) = x | ... | f_n(...) = x` over
//! the constructors of `S`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{AdtModel, Formula, VarSort};
use crate::backend::{solve, IntModel, SolverConfig, SolverError, SolverResult};
use crate::models::{check_model, reconstruct_traced, ReconstructError};
use crate::normalize::{normalize, taken_names, Flat, FlatFormula, FlatLit, FreshDef, NameGen};
use crate::reduce::{reduce, size_fn, Mode, ReduceError, ReduceOptions, ReducedFormula};
use crate::signature::{check_expanding, CtorId, Signature, SortId, SortVerdict};

pub const DEFAULT_FUEL: usize = 100;

/// Every this many rounds the oldest unmatched variable is unfolded
/// instead of the one with the smallest size.
const FAIRNESS_PERIOD: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldError {
    #[error("variable `{0}` is already unfolded")]
    AlreadyUnfolded(String),
    #[error("unknown ADT variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Debug, Clone)]
pub struct UnfoldState {
    /// The current formula in flat form.
    pub flat: FlatFormula,
    /// Unfolded variables in unfolding order.
    pub unfolded: Vec<String>,
    pub round: usize,
    pub fuel: usize,
    /// Argument variable -> (unfolded variable, constructor, position).
    pub sites: BTreeMap<String, (String, CtorId, usize)>,
    /// ADT variables in creation order.
    pub order: Vec<String>,
    names: NameGen,
}

impl UnfoldState {
    pub fn new(sig: &Signature, f: &Formula, fuel: usize) -> Self {
        Self::from_flat(sig, normalize(sig, f), fuel)
    }

    pub fn from_flat(sig: &Signature, flat: FlatFormula, fuel: usize) -> Self {
        let names = NameGen::new("_u", taken_names(sig, flat.vars.keys().cloned()));
        let fresh: BTreeSet<&String> = flat.fresh.iter().map(|(n, _)| n).collect();
        let mut order: Vec<String> = flat
            .vars
            .keys()
            .filter(|v| !fresh.contains(v))
            .cloned()
            .collect();
        order.extend(flat.fresh.iter().map(|(n, _)| n.clone()));
        order.retain(|v| matches!(flat.vars[v], VarSort::Adt(_)));
        UnfoldState {
            flat,
            unfolded: Vec::new(),
            round: 0,
            fuel,
            sites: BTreeMap::new(),
            order,
            names,
        }
    }

    pub fn is_unfolded(&self, x: &str) -> bool {
        self.unfolded.iter().any(|u| u == x)
    }

    /// The source variable whose unfolding chain produced `x`.
    pub fn root_of<'a>(&'a self, mut x: &'a str) -> &'a str {
        while let Some((parent, _, _)) = self.sites.get(x) {
            x = parent;
        }
        x
    }

    /// Number of unfoldings along the chain of each source variable.
    pub fn unfoldings_per_root(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for u in &self.unfolded {
            *out.entry(self.root_of(u).to_string()).or_insert(0) += 1;
        }
        out
    }
}

/// Conjoins the constructor case split for `x` with fresh argument variables.
pub fn unfold_step(sig: &Signature, state: &UnfoldState, x: &str) -> Result<UnfoldState, UnfoldError> {
    let Some(VarSort::Adt(s)) = state.flat.vars.get(x).copied() else {
        return Err(UnfoldError::UnknownVariable(x.to_string()));
    };
    if state.is_unfolded(x) {
        return Err(UnfoldError::AlreadyUnfolded(x.to_string()));
    }
    let mut next = state.clone();
    let mut cases = Vec::new();
    for &c in sig.ctors_of(s) {
        let mut args = Vec::new();
        for (j, a) in sig.ctor(c).args.iter().enumerate() {
            let v = next.names.fresh();
            next.flat.vars.insert(v.clone(), VarSort::Adt(a.sort));
            next.flat.fresh.push((v.clone(), FreshDef::Sel(c, j, x.to_string())));
            next.sites.insert(v.clone(), (x.to_string(), c, j));
            next.order.push(v.clone());
            args.push(v);
        }
        cases.push(Flat::Lit(FlatLit::Ctor {
            ctor: c,
            args,
            result: x.to_string(),
        }));
    }
    let root = std::mem::replace(&mut next.flat.root, Flat::True);
    let mut conj = match root {
        Flat::And(xs) => xs,
        other => vec![other],
    };
    conj.push(Flat::Or(cases));
    next.flat.root = Flat::And(conj);
    next.unfolded.push(x.to_string());
    next.round += 1;
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct SizeSolveConfig {
    pub fuel: usize,
    pub solver: SolverConfig,
    pub reduce: ReduceOptions,
}

impl Default for SizeSolveConfig {
    fn default() -> Self {
        SizeSolveConfig {
            fuel: DEFAULT_FUEL,
            solver: SolverConfig::default(),
            reduce: ReduceOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizeVerdict {
    Sat(AdtModel),
    Unsat,
    Unknown(String),
}

#[derive(Debug, Clone)]
pub struct SizeOutcome {
    pub verdict: SizeVerdict,
    pub rounds: usize,
    /// Unfoldings along the chain of each source variable.
    pub unfoldings: BTreeMap<String, usize>,
    /// Reduct of the last round.
    pub last_reduct: Option<ReducedFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SizeSolveError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Non-enumeration ADT variables whose value is shared by no unfolded
/// variable of the same sort, in creation order.
fn unmatched<'a>(state: &'a UnfoldState, reduct: &ReducedFormula, m: &IntModel) -> Vec<&'a String> {
    let covered: BTreeSet<(i64, SortId)> = state
        .unfolded
        .iter()
        .filter_map(|u| match state.flat.vars[u] {
            VarSort::Adt(s) => Some((m.var(u), s)),
            VarSort::Int => None,
        })
        .collect();
    state
        .order
        .iter()
        .filter(|v| match state.flat.vars.get(*v) {
            Some(VarSort::Adt(s)) => {
                !reduct.table.enum_sorts.contains(s) && !covered.contains(&(m.var(v), *s))
            }
            _ => false,
        })
        .collect()
}

/// Which variable to unfold next.
fn choose<'a>(
    sig: &Signature,
    state: &UnfoldState,
    candidates: &[&'a String],
    m: &IntModel,
) -> &'a String {
    if (state.round + 1).is_multiple_of(FAIRNESS_PERIOD) {
        return candidates[0];
    }
    let size = |v: &String| match state.flat.vars[v] {
        VarSort::Adt(s) => m.apply(&size_fn(sig, s), &[m.var(v)]),
        VarSort::Int => i64::MAX,
    };
    candidates
        .iter()
        .copied()
        .enumerate()
        .min_by_key(|(i, v)| (size(v), *i))
        .map(|(_, v)| v)
        .expect("candidates are non-empty")
}

/// Expandingness verdicts of the sorts in `sorts`, one line each.
fn diagnosis(sig: &Signature, sorts: &BTreeSet<SortId>) -> String {
    let report = check_expanding(sig);
    let mut parts = Vec::new();
    for &s in sorts {
        if let SortVerdict::NonExpanding(c) = report.verdict(s) {
            parts.push(format!(
                "NonExpanding({}): cycle {}",
                sig.sort_name(s),
                c.display(sig)
            ));
        }
    }
    if parts.is_empty() {
        "all sorts are expanding".to_string()
    } else {
        parts.join("; ")
    }
}

/// The unfolding loop on `f`.
pub fn solve_with_size(
    sig: &Signature,
    f: &Formula,
    cfg: &SizeSolveConfig,
) -> Result<SizeOutcome, SizeSolveError> {
    let mut state = UnfoldState::new(sig, f, cfg.fuel);
    loop {
        let reduct = reduce(sig, &state.flat, Mode::Size, &cfg.reduce)?;
        let res = solve(&reduct, &cfg.solver)?;
        let done = |verdict, state: &UnfoldState, reduct| SizeOutcome {
            verdict,
            rounds: state.round,
            unfoldings: state.unfoldings_per_root(),
            last_reduct: Some(reduct),
        };
        let m = match res {
            SolverResult::Unsat => return Ok(done(SizeVerdict::Unsat, &state, reduct)),
            SolverResult::Unknown(why) => {
                return Ok(done(SizeVerdict::Unknown(format!("solver: {why}")), &state, reduct))
            }
            SolverResult::Sat(m) => m,
        };
        let rec = reconstruct_traced(sig, &state.flat, &reduct, &m)?;
        let open = unmatched(&state, &reduct, &m);
        let holds = check_model(sig, &rec.model, f)
            .map_err(|e| SizeSolveError::Internal(e.to_string()))?
            .holds;
        if open.is_empty() {
            // every variable is built from the model, so no term was invented
            let fresh: Vec<&str> = rec
                .fresh_vars()
                .into_iter()
                .filter(|v| match state.flat.vars[*v] {
                    VarSort::Adt(s) => !reduct.table.enum_sorts.contains(&s),
                    VarSort::Int => false,
                })
                .collect();
            if !fresh.is_empty() || !holds {
                return Err(SizeSolveError::Internal(format!(
                    "fully unfolded model does not reconstruct (fresh: {fresh:?})"
                )));
            }
        }
        if holds {
            return Ok(done(SizeVerdict::Sat(rec.model), &state, reduct));
        }
        if state.round >= state.fuel {
            let sorts: BTreeSet<SortId> = open
                .iter()
                .filter_map(|v| match state.flat.vars[*v] {
                    VarSort::Adt(s) => Some(s),
                    VarSort::Int => None,
                })
                .collect();
            let witnesses: Vec<String> = open.iter().take(4).map(|v| format!("{v}={}", m.var(v))).collect();
            let msg = format!(
                "fuel {} exhausted; {}; unmatched: {}",
                state.fuel,
                diagnosis(sig, &sorts),
                witnesses.join(", ")
            );
            return Ok(done(SizeVerdict::Unknown(msg), &state, reduct));
        }
        let x = choose(sig, &state, &open, &m).clone();
        state = unfold_step(sig, &state, &x).map_err(|e| SizeSolveError::Internal(e.to_string()))?;
    }
}

/// Whether the unfolding loop decides every formula over `sig`.
pub fn completeness_report(sig: &Signature) -> String {
    let report = check_expanding(sig);
    if report.is_expanding() {
        return "decision procedure complete: every sort is expanding\n".to_string();
    }
    let mut out = String::from("decision procedure incomplete: unknown answers are possible\n");
    for s in sig.sorts() {
        if let SortVerdict::NonExpanding(c) = report.verdict(s) {
            out.push_str(&format!(
                "  {}: non-expanding (cycle: {})\n",
                sig.sort_name(s),
                c.display(sig)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests;
