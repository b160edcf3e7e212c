//! Equisatisfiability-preserving clean-up of reducts.

use std::collections::{BTreeMap, BTreeSet};

use super::ReducedFormula;
use crate::ast::CmpOp;
use crate::reduced::{AtomKey, ITerm, Lin, RFormula, SymbolTable, VarOrigin};

/// Simplifies to a fixpoint: constant folding, substitution of top-level
/// variable equalities, and elimination of introduced variables that occur
/// only in one defining equation or only in satisfiable bounds.
pub fn simplify(reduct: &ReducedFormula) -> ReducedFormula {
    let mut f = fold(&reduct.formula);
    loop {
        let next = step(&f, &reduct.table);
        if next == f {
            break;
        }
        f = next;
    }
    ReducedFormula {
        formula: f,
        ..reduct.clone()
    }
}

fn step(f: &RFormula, table: &SymbolTable) -> RFormula {
    let g = substitute_definitions(f, table);
    if g != *f {
        return fold(&g);
    }
    let dead = eliminable(f, table);
    if dead.is_empty() {
        return f.clone();
    }
    fold(&drop_atoms(f, &dead))
}

fn is_source(table: &SymbolTable, v: &str) -> bool {
    table
        .vars
        .get(v)
        .is_none_or(|i| i.origin == VarOrigin::Source)
}

/// Elimination order: introduced variables before source variables, then
/// by name.
fn rank(table: &SymbolTable, v: &str) -> (bool, String) {
    (!is_source(table, v), v.to_string())
}

/// An equation `v = c` or `v = w`, oriented to eliminate the variable of
/// higher rank.
fn definition(f: &RFormula, table: &SymbolTable) -> Option<(String, ITerm)> {
    let RFormula::Cmp(CmpOp::Eq, a, b) = f else { return None };
    let key = AtomKey::new(CmpOp::Eq, a, b);
    match key.coeffs.as_slice() {
        [(ITerm::Var(v), 1)] => Some((v.clone(), ITerm::Const(-key.constant))),
        [(ITerm::Var(v), 1), (ITerm::Var(w), -1)] if key.constant == 0 => {
            if rank(table, v) > rank(table, w) {
                Some((v.clone(), ITerm::Var(w.clone())))
            } else {
                Some((w.clone(), ITerm::Var(v.clone())))
            }
        }
        _ => None,
    }
}

fn mentions(f: &RFormula, v: &str) -> bool {
    f.vars().contains(v)
}

/// In every conjunction, uses one equation `v = t` among its children to
/// replace `v` by `t` in the sibling children.
fn substitute_definitions(f: &RFormula, table: &SymbolTable) -> RFormula {
    match f {
        RFormula::And(xs) => {
            let pick = xs.iter().enumerate().find_map(|(i, x)| {
                let (v, t) = definition(x, table)?;
                let used = xs
                    .iter()
                    .enumerate()
                    .any(|(j, y)| j != i && mentions(y, &v));
                used.then_some((i, v, t))
            });
            let xs: Vec<RFormula> = match pick {
                Some((i, v, t)) => {
                    let mut sub = |x: ITerm| match x {
                        ITerm::Var(ref n) if *n == v => t.clone(),
                        other => other,
                    };
                    xs.iter()
                        .enumerate()
                        .map(|(j, x)| if j == i { x.clone() } else { x.map_terms(&mut sub) })
                        .collect()
                }
                None => xs.clone(),
            };
            RFormula::And(xs.iter().map(|x| substitute_definitions(x, table)).collect())
        }
        RFormula::Or(xs) => RFormula::Or(xs.iter().map(|x| substitute_definitions(x, table)).collect()),
        RFormula::Not(x) => RFormula::not(substitute_definitions(x, table)),
        other => other.clone(),
    }
}

#[derive(Default)]
struct Occ {
    total: usize,
    /// Positive atoms mentioning the variable.
    atoms: Vec<AtomKey>,
    only_positive: bool,
}

fn occurrences(f: &RFormula, positive: bool, out: &mut BTreeMap<String, Occ>) {
    match f {
        RFormula::Cmp(op, a, b) => {
            let key = AtomKey::new(*op, a, b);
            let mut seen = BTreeSet::new();
            for (_, t) in a.terms.iter().chain(&b.terms) {
                t.visit_vars(&mut |v| {
                    let e = out.entry(v.to_string()).or_insert_with(|| Occ {
                        only_positive: true,
                        ..Occ::default()
                    });
                    e.total += 1;
                    e.only_positive &= positive;
                    if seen.insert(v.to_string()) {
                        e.atoms.push(key.clone());
                    }
                });
            }
        }
        RFormula::Not(x) => occurrences(x, !positive, out),
        RFormula::And(xs) | RFormula::Or(xs) => {
            xs.iter().for_each(|x| occurrences(x, positive, out))
        }
        RFormula::True | RFormula::False => {}
    }
}

/// Atoms that can be replaced by `true`, because the only introduced
/// variable they constrain can always be chosen to satisfy them.
fn eliminable(f: &RFormula, table: &SymbolTable) -> BTreeSet<AtomKey> {
    let mut occ = BTreeMap::new();
    occurrences(f, true, &mut occ);
    let mut out = BTreeSet::new();
    for (v, o) in &occ {
        if is_source(table, v) || !o.only_positive {
            continue;
        }
        let var = ITerm::Var(v.clone());
        // single defining equation `v = t` with v not under a function
        if o.total == 1 && o.atoms.len() == 1 {
            let k = &o.atoms[0];
            if k.is_eq && k.coeffs.iter().any(|(t, c)| *t == var && c.abs() == 1) {
                out.insert(k.clone());
                continue;
            }
        }
        // only bounds on v, jointly satisfiable
        let bounds_only = o.atoms.iter().all(|k| {
            matches!(k.coeffs.as_slice(), [(t, c)] if *t == var && c.abs() == 1)
        });
        if bounds_only && o.total == o.atoms.len() && bounds_satisfiable(&o.atoms) {
            out.extend(o.atoms.iter().cloned());
        }
    }
    out
}

fn bounds_satisfiable(atoms: &[AtomKey]) -> bool {
    let (mut lo, mut hi) = (i128::MIN, i128::MAX);
    for k in atoms {
        let (c, d) = (k.coeffs[0].1 as i128, k.constant as i128);
        // c*v + d (= | <=) 0 with c = +-1
        if k.is_eq {
            let v = -d * c;
            lo = lo.max(v);
            hi = hi.min(v);
        } else if c == 1 {
            hi = hi.min(-d);
        } else {
            lo = lo.max(d);
        }
    }
    lo <= hi
}

fn drop_atoms(f: &RFormula, dead: &BTreeSet<AtomKey>) -> RFormula {
    match f {
        RFormula::Cmp(op, a, b) if dead.contains(&AtomKey::new(*op, a, b)) => RFormula::True,
        RFormula::Not(x) => RFormula::not(drop_atoms(x, dead)),
        RFormula::And(xs) => RFormula::And(xs.iter().map(|x| drop_atoms(x, dead)).collect()),
        RFormula::Or(xs) => RFormula::Or(xs.iter().map(|x| drop_atoms(x, dead)).collect()),
        other => other.clone(),
    }
}

/// Constant folding, flattening of nested connectives and removal of
/// duplicate children.
fn fold(f: &RFormula) -> RFormula {
    match f {
        RFormula::Cmp(op, a, b) => match AtomKey::new(*op, a, b).constant_value() {
            Some(true) => RFormula::True,
            Some(false) => RFormula::False,
            None => RFormula::Cmp(*op, a.clone(), b.clone()),
        },
        RFormula::Not(x) => match fold(x) {
            RFormula::True => RFormula::False,
            RFormula::False => RFormula::True,
            RFormula::Not(y) => *y,
            y => RFormula::not(y),
        },
        RFormula::And(xs) | RFormula::Or(xs) => {
            let is_and = matches!(f, RFormula::And(_));
            let (unit, zero) = if is_and {
                (RFormula::True, RFormula::False)
            } else {
                (RFormula::False, RFormula::True)
            };
            let mut out: Vec<RFormula> = Vec::new();
            let mut seen = BTreeSet::new();
            let mut push = |x: RFormula, out: &mut Vec<RFormula>| {
                if seen.insert(key_of(&x)) {
                    out.push(x);
                }
            };
            for x in xs {
                let x = fold(x);
                if x == zero {
                    return zero;
                }
                if x == unit {
                    continue;
                }
                match x {
                    RFormula::And(ys) if is_and => ys.into_iter().for_each(|y| push(y, &mut out)),
                    RFormula::Or(ys) if !is_and => ys.into_iter().for_each(|y| push(y, &mut out)),
                    y => push(y, &mut out),
                }
            }
            if is_and && has_complementary(&out) {
                return RFormula::False;
            }
            match out.len() {
                0 => unit,
                1 => out.pop().expect("one child"),
                _ if is_and => RFormula::And(out),
                _ => RFormula::Or(out),
            }
        }
        other => other.clone(),
    }
}

/// `a` and `not a` in the same conjunction.
fn has_complementary(xs: &[RFormula]) -> bool {
    let pos: BTreeSet<String> = xs.iter().filter(|x| !matches!(x, RFormula::Not(_))).map(key_of).collect();
    xs.iter().any(|x| match x {
        RFormula::Not(y) => pos.contains(&key_of(y)),
        _ => false,
    })
}

fn key_of(f: &RFormula) -> String {
    match f {
        RFormula::Cmp(op, a, b) => {
            let k = AtomKey::new(*op, a, b);
            let lin = Lin::sum(k.coeffs.iter().map(|(t, c)| (*c, t.clone())).collect(), k.constant);
            format!("{}{}", if k.is_eq { "=" } else { "<=" }, lin)
        }
        RFormula::Not(x) => format!("!{}", key_of(x)),
        other => other.to_string(),
    }
}
