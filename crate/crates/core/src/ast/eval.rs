//! Evaluation of formulas under explicit ADT models.

use std::cell::RefCell;
use std::collections::BTreeMap;

use thiserror::Error;

use super::{AdtModel, Formula, IntExpr, Term};
use crate::signature::{Signature, SortId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("integer overflow during evaluation")]
    Overflow,
}

/// Evaluator with a cache of default selector witnesses.
pub struct Evaluator<'a> {
    sig: &'a Signature,
    model: &'a AdtModel,
    defaults: RefCell<BTreeMap<SortId, Term>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(sig: &'a Signature, model: &'a AdtModel) -> Self {
        Evaluator {
            sig,
            model,
            defaults: RefCell::new(BTreeMap::new()),
        }
    }

    fn default_term(&self, s: SortId) -> Term {
        self.defaults
            .borrow_mut()
            .entry(s)
            .or_insert_with(|| self.sig.default_term(s))
            .clone()
    }

    pub fn term(&self, t: &Term) -> Result<Term, EvalError> {
        match t {
            Term::Var(n, _) => self
                .model
                .adt
                .get(n)
                .cloned()
                .ok_or_else(|| EvalError::UnboundVariable(n.clone())),
            Term::Ctor(c, args) => Ok(Term::Ctor(
                *c,
                args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?,
            )),
            Term::Sel(c, j, arg) => {
                let v = self.term(arg)?;
                match v {
                    Term::Ctor(head, mut args) if head == *c => Ok(args.swap_remove(*j)),
                    other => {
                        let key = (*c, *j, other);
                        match self.model.selector_overrides.get(&key) {
                            Some(t) => Ok(t.clone()),
                            None => Ok(self.default_term(self.sig.ctor(*c).args[*j].sort)),
                        }
                    }
                }
            }
        }
    }

    pub fn int(&self, e: &IntExpr) -> Result<i128, EvalError> {
        match e {
            IntExpr::Const(v) => Ok(*v as i128),
            IntExpr::Var(n) => self
                .model
                .ints
                .get(n)
                .map(|&v| v as i128)
                .ok_or_else(|| EvalError::UnboundVariable(n.clone())),
            IntExpr::Size(t) => Ok(self.term(t)?.size() as i128),
            IntExpr::Add(xs) => xs.iter().try_fold(0i128, |acc, x| {
                acc.checked_add(self.int(x)?).ok_or(EvalError::Overflow)
            }),
            IntExpr::Mul(c, x) => (*c as i128)
                .checked_mul(self.int(x)?)
                .ok_or(EvalError::Overflow),
        }
    }

    pub fn formula(&self, f: &Formula) -> Result<bool, EvalError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Tester(c, t) => self.term(t)?.head() == Some(*c),
            Formula::Eq(a, b) => self.term(a)? == self.term(b)?,
            Formula::IntCmp(op, a, b) => op.holds(self.int(a)?, self.int(b)?),
            Formula::Not(x) => !self.formula(x)?,
            Formula::And(xs) => {
                // evaluate all children so unbound variables are always reported
                let mut all = true;
                for x in xs {
                    all &= self.formula(x)?;
                }
                all
            }
            Formula::Or(xs) => {
                let mut any = false;
                for x in xs {
                    any |= self.formula(x)?;
                }
                any
            }
            Formula::Implies(a, b) => {
                let a = self.formula(a)?;
                let b = self.formula(b)?;
                !a || b
            }
        })
    }
}

/// Truth value of `f` under `model`.
pub fn evaluate(sig: &Signature, model: &AdtModel, f: &Formula) -> Result<bool, EvalError> {
    Evaluator::new(sig, model).formula(f)
}

/// Value of `t` under `model` as a ground constructor term.
pub fn evaluate_term(sig: &Signature, model: &AdtModel, t: &Term) -> Result<Term, EvalError> {
    Evaluator::new(sig, model).term(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;

    const LISTS_QUERY: &str = "(declare-datatypes ((Colour 0) (CList 0)) \
        (((red) (green) (blue)) ((nil) (cons (head Colour) (tail CList)))))\n\
        (declare-const x CList)\n(declare-const y Colour)\n\
        (assert (and ((_ is cons) x) (not (= y blue)) (or (= (head x) red) (= x (cons y nil)))))";

    #[test]
    fn lists_query_model() {
        let s = parse(LISTS_QUERY).unwrap();
        let sig = &s.sig;
        let c = |n| sig.ctor_id(n).unwrap();
        let model = AdtModel::new()
            .with_adt("x", Term::Ctor(c("cons"), vec![Term::Ctor(c("red"), vec![]), Term::Ctor(c("nil"), vec![])]))
            .with_adt("y", Term::Ctor(c("green"), vec![]));
        assert_eq!(evaluate(sig, &model, &s.formula()), Ok(true));
        let bad = AdtModel::new().with_adt("x", Term::Ctor(c("nil"), vec![]));
        assert_eq!(
            evaluate(sig, &bad, &s.formula()),
            Err(EvalError::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn sizes_and_wrong_headed_selectors() {
        let s = parse(LISTS_QUERY).unwrap();
        let sig = &s.sig;
        let c = |n| sig.ctor_id(n).unwrap();
        let blue_list = Term::Ctor(c("cons"), vec![Term::Ctor(c("blue"), vec![]), Term::Ctor(c("nil"), vec![])]);
        assert_eq!(blue_list.size(), 3);
        let nil = Term::Ctor(c("nil"), vec![]);
        let model = AdtModel::new().with_adt("x", nil.clone());
        let head = Term::Sel(c("cons"), 0, Box::new(Term::var("x", sig.sort_id("CList").unwrap())));
        // default witness: first Colour term
        assert_eq!(evaluate_term(sig, &model, &head), Ok(Term::Ctor(c("red"), vec![])));
        let mut model = model;
        model
            .selector_overrides
            .insert((c("cons"), 0, nil), Term::Ctor(c("green"), vec![]));
        assert_eq!(evaluate_term(sig, &model, &head), Ok(Term::Ctor(c("green"), vec![])));
    }
}
