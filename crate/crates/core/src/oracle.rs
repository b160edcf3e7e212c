//! Bounded model search by enumeration: every ADT variable ranges over
//! the ground terms up to a size bound, every integer variable over a
//! fixed interval. A selector applied to a term built by another
//! constructor is unspecified, so the value of every such application the
//! formula reaches is enumerated over the same terms.

use crate::ast::{AdtModel, EvalError, Evaluator, Formula, IntExpr, Term, VarSort};
use crate::signature::{CtorId, Signature, SignatureError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest term size assigned to ADT variables.
    pub max_size: u64,
    /// Inclusive range of integer variables.
    pub int_range: (i64, i64),
    /// Largest number of assignments tried before giving up.
    pub max_assignments: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_size: 6,
            int_range: (0, 13),
            max_assignments: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// A model within the bounds.
    Model(AdtModel),
    /// No model within the bounds.
    NoModel,
    /// The search space exceeds `max_assignments`.
    TooLarge(u128),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Number of assignments the search would try.
pub fn search_space(
    sig: &Signature,
    vars: &[(String, VarSort)],
    cfg: &OracleConfig,
) -> Result<u128, SignatureError> {
    let table = sig.count_table(cfg.max_size as usize)?;
    let ints = (cfg.int_range.1 - cfg.int_range.0 + 1).max(0) as u128;
    Ok(vars.iter().fold(1u128, |acc, (_, s)| {
        let n = match s {
            VarSort::Adt(s) => table[s.0].iter().sum::<u128>(),
            VarSort::Int => ints,
        };
        acc.saturating_mul(n)
    }))
}

/// Searches assignments of `vars` in enumeration order for a model of `f`.
pub fn bounded_search(
    sig: &Signature,
    vars: &[(String, VarSort)],
    f: &Formula,
    cfg: &OracleConfig,
) -> Result<OracleVerdict, OracleError> {
    let space = search_space(sig, vars, cfg)?;
    if space > cfg.max_assignments as u128 {
        return Ok(OracleVerdict::TooLarge(space));
    }
    let table = sig.terms_by_size(cfg.max_size as usize)?;
    let domains: Vec<Vec<Value>> = vars
        .iter()
        .map(|(_, s)| match s {
            VarSort::Adt(s) => table[s.0].iter().flatten().cloned().map(Value::Adt).collect(),
            VarSort::Int => (cfg.int_range.0..=cfg.int_range.1).map(Value::Int).collect(),
        })
        .collect();
    if domains.iter().any(Vec::is_empty) {
        return Ok(OracleVerdict::NoModel);
    }
    let mut sels = Vec::new();
    selectors_in(f, &mut sels);
    let mut search = Search {
        sig,
        f,
        sels,
        table: &table,
        evals: 0,
        limit: cfg.max_assignments,
    };
    let mut idx = vec![0usize; vars.len()];
    loop {
        let mut model = AdtModel::new();
        for ((name, _), (dom, &i)) in vars.iter().zip(domains.iter().zip(&idx)) {
            match &dom[i] {
                Value::Adt(t) => {
                    model.adt.insert(name.clone(), t.clone());
                }
                Value::Int(v) => {
                    model.ints.insert(name.clone(), *v);
                }
            }
        }
        match search.complete(&mut model)? {
            Some(true) => return Ok(OracleVerdict::Model(model)),
            Some(false) => {}
            None => return Ok(OracleVerdict::TooLarge(search.evals as u128)),
        }
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return Ok(OracleVerdict::NoModel);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < domains[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

type SelKey = (CtorId, usize, Term);

struct Search<'a> {
    sig: &'a Signature,
    f: &'a Formula,
    sels: Vec<&'a Term>,
    table: &'a [Vec<Vec<Term>>],
    evals: u64,
    limit: u64,
}

impl Search<'_> {
    /// Extends the selector values of `model` until `f` holds; `None` when
    /// the evaluation budget runs out.
    fn complete(&mut self, model: &mut AdtModel) -> Result<Option<bool>, OracleError> {
        self.evals += 1;
        if self.evals > self.limit {
            return Ok(None);
        }
        if Evaluator::new(self.sig, model).formula(self.f)? {
            return Ok(Some(true));
        }
        let Some(key) = self.open_key(model)? else {
            return Ok(Some(false));
        };
        let sort = self.sig.ctor(key.0).args[key.1].sort;
        for v in self.table[sort.0].iter().flatten() {
            model.selector_overrides.insert(key.clone(), v.clone());
            match self.complete(model)? {
                Some(false) => {}
                other => return Ok(other),
            }
        }
        model.selector_overrides.remove(&key);
        Ok(Some(false))
    }

    /// A reached selector application outside its constructor with no value yet.
    fn open_key(&self, model: &AdtModel) -> Result<Option<SelKey>, OracleError> {
        let ev = Evaluator::new(self.sig, model);
        for t in &self.sels {
            let Term::Sel(c, j, arg) = t else { continue };
            let v = ev.term(arg)?;
            if v.head() != Some(*c) {
                let key = (*c, *j, v);
                if !model.selector_overrides.contains_key(&key) {
                    return Ok(Some(key));
                }
            }
        }
        Ok(None)
    }
}

/// Selector subterms of `f`, inner ones first.
fn selectors_in<'a>(f: &'a Formula, out: &mut Vec<&'a Term>) {
    fn term<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
        match t {
            Term::Var(..) => {}
            Term::Ctor(_, args) => args.iter().for_each(|a| term(a, out)),
            Term::Sel(_, _, a) => {
                term(a, out);
                out.push(t);
            }
        }
    }
    fn int<'a>(e: &'a IntExpr, out: &mut Vec<&'a Term>) {
        match e {
            IntExpr::Const(_) | IntExpr::Var(_) => {}
            IntExpr::Size(t) => term(t, out),
            IntExpr::Add(xs) => xs.iter().for_each(|x| int(x, out)),
            IntExpr::Mul(_, x) => int(x, out),
        }
    }
    match f {
        Formula::True | Formula::False => {}
        Formula::Tester(_, t) => term(t, out),
        Formula::Eq(a, b) => {
            term(a, out);
            term(b, out);
        }
        Formula::IntCmp(_, a, b) => {
            int(a, out);
            int(b, out);
        }
        Formula::Not(x) => selectors_in(x, out),
        Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| selectors_in(x, out)),
        Formula::Implies(a, b) => {
            selectors_in(a, out);
            selectors_in(b, out);
        }
    }
}

#[derive(Debug, Clone)]
enum Value {
    Adt(Term),
    Int(i64),
}

/// Whether every ADT value and selector value of `model` is within the
/// bounds, so that the bounded search would have had to find a model.
pub fn within_bounds(model: &AdtModel, cfg: &OracleConfig) -> bool {
    model.adt.values().all(|t| t.size() <= cfg.max_size)
        && model.selector_overrides.values().all(|t| t.size() <= cfg.max_size)
        && model
            .ints
            .values()
            .all(|v| (cfg.int_range.0..=cfg.int_range.1).contains(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;

    const LISTS: &str = "(declare-datatypes ((Colour 0) (CList 0))
      (((red) (green) (blue)) ((nil) (cons (head Colour) (tail CList)))))
    (declare-const x CList)
    (declare-const y CList)
    ";

    #[test]
    fn finds_small_models_and_refutes() {
        let s = parse(&format!("{LISTS}(assert (and ((_ is cons) x) (= (tail x) y) ((_ is cons) y)))")).unwrap();
        let cfg = OracleConfig::default();
        let OracleVerdict::Model(m) = bounded_search(&s.sig, &s.vars, &s.formula(), &cfg).unwrap() else {
            panic!("expected a model");
        };
        assert_eq!(m.adt["x"].size(), 5);
        let s = parse(&format!("{LISTS}(assert (= x (cons red x)))")).unwrap();
        assert_eq!(bounded_search(&s.sig, &s.vars, &s.formula(), &cfg).unwrap(), OracleVerdict::NoModel);
    }

    #[test]
    fn selectors_outside_their_constructor_are_free() {
        let s = parse(&format!("{LISTS}(assert (and ((_ is nil) x) (= (tail x) (cons red y)) ((_ is cons) y)))")).unwrap();
        let OracleVerdict::Model(m) = bounded_search(&s.sig, &s.vars, &s.formula(), &OracleConfig::default()).unwrap()
        else {
            panic!("expected a model");
        };
        assert_eq!(m.selector_overrides.len(), 1);
        assert!(crate::ast::evaluate(&s.sig, &m, &s.formula()).unwrap());
    }

    #[test]
    fn search_space_counts_terms() {
        let s = parse(LISTS).unwrap();
        let cfg = OracleConfig::default();
        // 1 + 3 + 9 lists of size 1, 3, 5
        assert_eq!(search_space(&s.sig, &s.vars, &cfg).unwrap(), 13 * 13);
        let tiny = OracleConfig {
            max_assignments: 100,
            ..cfg
        };
        assert_eq!(
            bounded_search(&s.sig, &s.vars, &Formula::True, &tiny).unwrap(),
            OracleVerdict::TooLarge(169)
        );
    }
}
